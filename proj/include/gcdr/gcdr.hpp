#ifndef GCDR_GCDR_HPP
#define GCDR_GCDR_HPP

#include "ccpca.hpp"
#include "coupling.hpp"
#include "diagnostics.hpp"
#include "error.hpp"
#include "eval.hpp"
#include "graph.hpp"
#include "io.hpp"
#include "kernels.hpp"
#include "linalg.hpp"
#include "matrix.hpp"
#include "optim.hpp"
#include "parallel.hpp"
#include "pipeline.hpp"
#include "posterior.hpp"
#include "random.hpp"
#include "spectral.hpp"
#include "svg.hpp"
#include "synthetic.hpp"

#endif
