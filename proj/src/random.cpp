#include "mee/random.hpp"

#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>

#include <cmath>

namespace mee {

std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t child_seed(std::uint64_t parent, std::initializer_list<std::uint64_t> indices) {
  std::uint64_t s = mix_seed(parent);
  for (std::uint64_t i : indices) s = mix_seed(s ^ mix_seed(i + 0x632be59bd9b4e019ULL));
  return s;
}

double uniform01(Rng& rng) {
  boost::random::uniform_01<double> u;
  return u(rng);
}

double standard_normal(Rng& rng) {
  boost::random::normal_distribution<double> n(0.0, 1.0);
  return n(rng);
}

Eigen::VectorXd uniform_in_ball(Rng& rng, std::size_t d, double radius) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(d));
  double norm = 0.0;
  do {
    for (Eigen::Index k = 0; k < v.size(); ++k) v[k] = standard_normal(rng);
    norm = v.norm();
  } while (norm == 0.0);
  const double r = radius * std::pow(uniform01(rng), 1.0 / static_cast<double>(d));
  return v * (r / norm);
}

} // namespace mee
