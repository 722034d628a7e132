#ifndef PERFSAMP_PERFSAMP_HPP
#define PERFSAMP_PERFSAMP_HPP

#include "coefficients.hpp"
#include "engine.hpp"
#include "kernel.hpp"
#include "oracle.hpp"
#include "rng.hpp"
#include "stats.hpp"
#include "walks.hpp"

#endif // PERFSAMP_PERFSAMP_HPP
