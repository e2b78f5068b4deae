#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <string>

#include "framecond/cli.hpp"

namespace fc = framecond;
namespace cli = framecond::cli;

namespace {

void add_solver_flags(CLI::App* cmd, cli::RunConfig& cfg) {
  cmd->add_option("--max-iterations", cfg.options.max_iterations, "Iteration cap")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd->add_option("--objective-tol", cfg.options.objective_tolerance, "Objective (duality gap) tolerance")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd->add_option("--feasibility-tol", cfg.options.feasibility_tolerance, "Feasibility tolerance")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd->add_option("--seed", cfg.options.seed, "Random seed")->capture_default_str();
}

void add_output_flags(CLI::App* cmd, cli::RunConfig& cfg) {
  cmd->add_option("-o,--report", cfg.report_path, "Report file (default: stdout)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimal rescaling of frames and graph edge reweighting"};
  app.require_subcommand(1);
  cli::RunConfig cfg;

  auto* frame = app.add_subcommand("frame", "Frame commands (CSV input, one vector per column)");
  frame->require_subcommand(1);
  auto* analyze = frame->add_subcommand("analyze", "Spectral summary of the frame operator");
  auto* scale = frame->add_subcommand("scale", "Optimal rescaling");
  auto* scalable = frame->add_subcommand("scalable", "Scalability test");

  auto* graph = app.add_subcommand("graph", "Graph commands (edge-list input)");
  graph->require_subcommand(1);
  auto* condition = graph->add_subcommand("condition", "Minimize the condition number of the projected Laplacian");
  auto* gap = graph->add_subcommand("gap", "Minimize the spectral gap of the projected Laplacian");
  auto* resistance = graph->add_subcommand("resistance", "Effective resistances");

  auto* experiment = app.add_subcommand("experiment", "Experiments");
  experiment->require_subcommand(1);
  auto* conjecture = experiment->add_subcommand("conjecture", "Average resistance before and after conditioning");

  for (auto* cmd : {analyze, scale, scalable, condition, gap, resistance}) {
    cmd->add_option("input", cfg.input, "Input file")->required();
    add_output_flags(cmd, cfg);
  }
  for (auto* cmd : {scale, scalable, condition, gap}) add_solver_flags(cmd, cfg);

  std::string method = "sdp1";
  scale->add_option("-m,--method", method, "sdp1 | sdp2 | sdp3 | qp4")
      ->capture_default_str()
      ->check(CLI::IsMember({"sdp1", "sdp2", "sdp3", "qp4"}));
  scalable->add_option("--tol", cfg.scalable_tolerance, "Largest Frobenius objective counted as scalable")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  for (auto* cmd : {condition, gap}) cmd->add_option("--dot", cfg.dot_path, "Write a dot figure of the reweighted graph");

  conjecture->add_option("-g,--generator", cfg.generator, "erdos_renyi:N:p | barbell:k | random_regular:N:d")
      ->required();
  conjecture->add_option("-t,--trials", cfg.trials, "Number of trials")->capture_default_str();
  add_solver_flags(conjecture, cfg);
  add_output_flags(conjecture, cfg);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cli::exit_code::usage;
  }

  const std::map<CLI::App*, cli::Command> commands = {
      {analyze, cli::Command::frame_analyze},       {scale, cli::Command::frame_scale},
      {scalable, cli::Command::frame_scalable},     {condition, cli::Command::graph_condition},
      {gap, cli::Command::graph_gap},               {resistance, cli::Command::graph_resistance},
      {conjecture, cli::Command::experiment_conjecture},
  };
  for (const auto& [sub, command] : commands) {
    if (sub->parsed()) cfg.command = command;
  }
  cfg.method = *fc::parse_method(method);
  return cli::run(cfg, std::cout, std::cerr);
}
