#pragma once

#include "framecond/errors.hpp"
#include "framecond/spectral.hpp"
#include "framecond/frame.hpp"
#include "framecond/cone_program.hpp"
#include "framecond/nnls.hpp"
#include "framecond/conditioners.hpp"
#include "framecond/graph.hpp"
#include "framecond/graph_conditioning.hpp"
#include "framecond/experiment.hpp"
#include "framecond/io.hpp"
