#pragma once

#include "scrible/adversary.hpp"
#include "scrible/algorithms.hpp"
#include "scrible/barrier.hpp"
#include "scrible/ftrl_solver.hpp"
#include "scrible/geometry.hpp"
#include "scrible/harness.hpp"
#include "scrible/sampling.hpp"
#include "scrible/validation.hpp"
