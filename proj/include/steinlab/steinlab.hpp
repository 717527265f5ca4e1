#pragma once

#include "steinlab/couplings.hpp"
#include "steinlab/empirical.hpp"
#include "steinlab/error.hpp"
#include "steinlab/io.hpp"
#include "steinlab/models.hpp"
#include "steinlab/normal_approx.hpp"
#include "steinlab/pmf.hpp"
#include "steinlab/poincare.hpp"
#include "steinlab/poisson_bounds.hpp"
#include "steinlab/rng.hpp"
#include "steinlab/stein_chen.hpp"
