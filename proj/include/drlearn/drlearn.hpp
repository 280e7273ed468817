#ifndef DRLEARN_DRLEARN_HPP
#define DRLEARN_DRLEARN_HPP

#include "drlearn/checkpoint.hpp"
#include "drlearn/curve.hpp"
#include "drlearn/dataset.hpp"
#include "drlearn/dbn.hpp"
#include "drlearn/divergence.hpp"
#include "drlearn/gradcheck.hpp"
#include "drlearn/matrix.hpp"
#include "drlearn/mlp.hpp"
#include "drlearn/numerics.hpp"
#include "drlearn/pgm.hpp"
#include "drlearn/rbm.hpp"
#include "drlearn/rng.hpp"
#include "drlearn/runner.hpp"
#include "drlearn/sideinfo.hpp"
#include "drlearn/vae.hpp"

#endif
