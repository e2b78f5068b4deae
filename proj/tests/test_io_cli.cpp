#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "framecond/cli.hpp"
#include "framecond/io.hpp"

using namespace framecond;
namespace fs = std::filesystem;

namespace {

const std::string kData = FRAMECOND_DATA_DIR;

std::string data(const std::string& name) { return kData + "/" + name; }

fs::path scratch_dir() {
  const fs::path p = fs::temp_directory_path() / ("framecond_tests_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()));
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(cli::RunConfig cfg, std::string* out_text = nullptr, std::string* err_text = nullptr) {
  std::ostringstream out, err;
  const int code = cli::run(cfg, out, err);
  if (out_text) *out_text = out.str();
  if (err_text) *err_text = err.str();
  return code;
}

}  // namespace

TEST(FrameCsv, ParsesColumnsAsVectors) {
  const Frame f = parse_frame_text("1, 0, 2\n0, 1, 3\n");
  EXPECT_EQ(f.dim(), 2);
  EXPECT_EQ(f.count(), 3);
  EXPECT_EQ(f.vector(2), Eigen::Vector2d(2, 3));
  const Frame x = parse_frame_file(data("frame_x.csv"));
  EXPECT_EQ(x.dim(), 3);
  EXPECT_EQ(x.count(), 5);
  EXPECT_EQ(x.vectors()(2, 3), 5.0);
}

TEST(FrameCsv, AcceptsCrlf) {
  const Frame f = parse_frame_text("1,0,2\r\n0,1,3\r\n");
  EXPECT_EQ(f.vector(2), Eigen::Vector2d(2, 3));
  const WeightedGraph g = parse_graph_text("0 1\r\n1 2 2.5\r\n");
  EXPECT_EQ(g.edges()[1].w, 2.5);
}

TEST(FrameCsv, ErrorsCarryLineAndColumn) {
  try {
    parse_frame_text("1,2\n3,x\n", "f.csv");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_EQ(e.column(), 2u);
    EXPECT_EQ(std::string(e.what()).rfind("f.csv:2:2:", 0), 0u);
  }
  try {
    parse_frame_text("1,2\n3\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  try {
    parse_frame_text("1,0\n1,0\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.column(), 2u);
  }
  EXPECT_THROW(parse_frame_text(""), ParseError);
  EXPECT_THROW(parse_frame_text("1,nan\n"), ParseError);
  EXPECT_THROW(parse_frame_text("1\n2\n"), ParseError);
  EXPECT_THROW(parse_frame_file(data("missing.csv")), IoError);
}

TEST(EdgeList, ParsesCommentsHeaderAndDefaults) {
  const WeightedGraph g = parse_graph_text("# demo\nn 4\n0 1\n1 2 2.5  # heavy\n\n2 3 1\n");
  EXPECT_EQ(g.vertex_count(), 4);
  EXPECT_EQ(g.edge_count(), 3);
  EXPECT_EQ(g.edges()[0].w, 1.0);
  EXPECT_EQ(g.edges()[1].w, 2.5);
  const WeightedGraph b = parse_graph_file(data("barbell.edges"));
  EXPECT_EQ(b.vertex_count(), 10);
  EXPECT_EQ(b.edge_count(), 21);
}

TEST(EdgeList, Errors) {
  auto line_of = [](const std::string& text) {
    try {
      parse_graph_text(text);
    } catch (const ParseError& e) {
      return e.line();
    }
    return std::size_t{999};
  };
  EXPECT_EQ(line_of("0 1\n1 0\n"), 2u);
  EXPECT_EQ(line_of("0 1\n2 2\n"), 2u);
  EXPECT_EQ(line_of("0 1 -1\n"), 1u);
  EXPECT_EQ(line_of("0 1 abc\n"), 1u);
  EXPECT_EQ(line_of("n 3\n0 1\n1 3\n"), 3u);
  EXPECT_EQ(line_of("0\n"), 1u);
  EXPECT_EQ(line_of("0 1 2 3\n"), 1u);
  EXPECT_THROW(parse_graph_text("# nothing\n"), ParseError);
}

TEST(EdgeList, RoundTrip) {
  const WeightedGraph g(5, {{0, 1, 0.1}, {1, 2, 1.0 / 3.0}, {2, 3, 7.25}, {0, 4, 1e-7}});
  const WeightedGraph h = parse_graph_text(format_graph(g));
  ASSERT_EQ(h.vertex_count(), g.vertex_count());
  ASSERT_EQ(h.edge_count(), g.edge_count());
  for (Index k = 0; k < g.edge_count(); ++k) {
    EXPECT_EQ(h.edges()[k].u, g.edges()[k].u);
    EXPECT_EQ(h.edges()[k].v, g.edges()[k].v);
    EXPECT_EQ(h.edges()[k].w, g.edges()[k].w);
  }
}

TEST(NumberFormat, RealsAndScientific) {
  EXPECT_EQ(format_real(0.0), "0.000000");
  EXPECT_EQ(format_real(1e-13), "0.000000");
  EXPECT_EQ(format_real(1.0), "1.000000");
  EXPECT_EQ(format_real(10.655313), "10.655313");
  EXPECT_EQ(format_real(0.0856611), "0.0856611");
  EXPECT_EQ(format_real(-2.5), "-2.500000");
  EXPECT_EQ(format_real(12345.678), "12345.678000");
  EXPECT_EQ(format_real(3e-11), "3.00000e-11");
  EXPECT_EQ(format_real(kInfinity), "inf");
  EXPECT_EQ(format_sci(1e-8), "1.000e-08");
}

TEST(Report, DocumentRoundTrip) {
  ReportDocument doc;
  doc.set("method", "sdp1");
  doc.set_real("objective", 0.5);
  doc.set_vector("scaling.u", Eigen::Vector2d(1, 0.25));
  EXPECT_EQ(doc.str(), "# framecond report\nmethod = sdp1\nobjective = 0.500000\nscaling.u = 1.000000 0.250000\n");
  const auto parsed = parse_report(doc.str());
  EXPECT_EQ(parsed.at("objective"), "0.500000");
  EXPECT_EQ(parsed.at("scaling.u"), "1.000000 0.250000");
}

TEST(Dot, PenWidths) {
  const WeightedGraph g(3, {{0, 1, 1}, {1, 2, 1}, {0, 2, 1}});
  const std::string spread = format_dot(g, Eigen::Vector3d(1, 2, 3));
  EXPECT_NE(spread.find("0 -- 1 [weight=1.000000, penwidth=0.5000];"), std::string::npos);
  EXPECT_NE(spread.find("1 -- 2 [weight=2.000000, penwidth=2.2500];"), std::string::npos);
  EXPECT_NE(spread.find("0 -- 2 [weight=3.000000, penwidth=4.0000];"), std::string::npos);
  const std::string flat = format_dot(g, Eigen::Vector3d::Ones());
  EXPECT_NE(flat.find("penwidth=2.2500"), std::string::npos);
  EXPECT_EQ(flat.rfind("graph G {\n", 0), 0u);
  EXPECT_THROW(format_dot(g, Eigen::Vector2d::Ones()), InputError);
}

TEST(Cli, FrameScaleReport) {
  cli::RunConfig cfg;
  cfg.command = cli::Command::frame_scale;
  cfg.input = data("frame_x.csv");
  cfg.method = Method::sdp1;
  std::string out;
  ASSERT_EQ(run_cli(cfg, &out), cli::exit_code::ok);
  const auto r = parse_report(out);
  EXPECT_EQ(r.at("command"), "frame scale");
  EXPECT_EQ(r.at("status"), "optimal");
  EXPECT_NEAR(std::stod(r.at("after.condition_number")), 10.655, 0.1);
  EXPECT_EQ(r.at("options.max_iterations"), "10000");
}

TEST(Cli, ReportsAreByteIdentical) {
  const fs::path dir = scratch_dir();
  cli::RunConfig cfg;
  cfg.command = cli::Command::graph_condition;
  cfg.input = data("barbell.edges");
  cfg.report_path = (dir / "a.txt").string();
  cfg.dot_path = (dir / "a.dot").string();
  ASSERT_EQ(run_cli(cfg), cli::exit_code::ok);
  cfg.report_path = (dir / "b.txt").string();
  cfg.dot_path = (dir / "b.dot").string();
  ASSERT_EQ(run_cli(cfg), cli::exit_code::ok);
  EXPECT_EQ(slurp(dir / "a.txt"), slurp(dir / "b.txt"));
  EXPECT_EQ(slurp(dir / "a.dot"), slurp(dir / "b.dot"));
  EXPECT_NE(slurp(dir / "a.dot").find("4 -- 5"), std::string::npos);
  fs::remove_all(dir);
}

TEST(Cli, ExperimentReproducible) {
  cli::RunConfig cfg;
  cfg.command = cli::Command::experiment_conjecture;
  cfg.generator = "erdos_renyi:8:0.4";
  cfg.trials = 3;
  cfg.options.seed = 5;
  std::string a, b;
  ASSERT_EQ(run_cli(cfg, &a), cli::exit_code::ok);
  ASSERT_EQ(run_cli(cfg, &b), cli::exit_code::ok);
  EXPECT_EQ(a, b);
  EXPECT_NE(a.find("trial.2 = "), std::string::npos);
}

TEST(Cli, ExitCodes) {
  cli::RunConfig cfg;
  cfg.command = cli::Command::frame_analyze;
  cfg.input = data("missing.csv");
  std::string err;
  EXPECT_EQ(run_cli(cfg, nullptr, &err), cli::exit_code::parse);
  EXPECT_NE(err.find("error:"), std::string::npos);

  const fs::path dir = scratch_dir();
  const fs::path bad = dir / "bad.csv";
  std::ofstream(bad) << "1,2\n3,oops\n";
  cfg.input = bad.string();
  EXPECT_EQ(run_cli(cfg, nullptr, &err), cli::exit_code::parse);
  EXPECT_NE(err.find(":2:2:"), std::string::npos);

  const fs::path split = dir / "split.edges";
  std::ofstream(split) << "0 1\n2 3\n";
  cfg.command = cli::Command::graph_condition;
  cfg.input = split.string();
  EXPECT_EQ(run_cli(cfg), cli::exit_code::parse);

  const fs::path deficient = dir / "deficient.csv";
  std::ofstream(deficient) << "1,2,3\n2,4,6\n";
  cfg.command = cli::Command::frame_scale;
  cfg.method = Method::sdp2;
  cfg.input = deficient.string();
  EXPECT_EQ(run_cli(cfg), cli::exit_code::infeasible);

  cfg.input = data("frame_x.csv");
  cfg.method = Method::sdp1;
  cfg.options.max_iterations = 2;
  EXPECT_EQ(run_cli(cfg), cli::exit_code::max_iter);

  cfg.options = {};
  cfg.report_path = (dir / "no_such_dir" / "r.txt").string();
  EXPECT_EQ(run_cli(cfg), cli::exit_code::output);

  cfg.report_path.clear();
  cfg.options.objective_tolerance = 0.0;
  EXPECT_EQ(run_cli(cfg), cli::exit_code::parse);
  fs::remove_all(dir);
}

TEST(Cli, ResistanceReport) {
  const fs::path dir = scratch_dir();
  const fs::path k3 = dir / "k3.edges";
  std::ofstream(k3) << "0 1\n1 2\n0 2\n";
  cli::RunConfig cfg;
  cfg.command = cli::Command::graph_resistance;
  cfg.input = k3.string();
  std::string out;
  ASSERT_EQ(run_cli(cfg, &out), cli::exit_code::ok);
  const auto r = parse_report(out);
  EXPECT_EQ(r.at("resistance.0.1"), "0.666667");
  EXPECT_EQ(r.at("resistance.average"), "0.666667");
  fs::remove_all(dir);
}
