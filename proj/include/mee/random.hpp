#pragma once

#include <Eigen/Dense>

#include <boost/random/mersenne_twister.hpp>

#include <cstdint>
#include <initializer_list>

namespace mee {

/// Engine used for every seeded draw. Distributions come from Boost.Random,
/// whose algorithms are fixed, so draws are reproducible across standard
/// libraries.
using Rng = boost::random::mt19937_64;

/// SplitMix64 finalizer.
std::uint64_t mix_seed(std::uint64_t x);

/// Child seed for the path `indices` below `parent` in the seed tree.
std::uint64_t child_seed(std::uint64_t parent, std::initializer_list<std::uint64_t> indices);

double uniform01(Rng& rng);
double standard_normal(Rng& rng);

/// Uniform draw from the Euclidean ball of the given radius in R^d.
Eigen::VectorXd uniform_in_ball(Rng& rng, std::size_t d, double radius);

} // namespace mee
