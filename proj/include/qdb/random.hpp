#ifndef QDB_RANDOM_HPP
#define QDB_RANDOM_HPP

#include <random>

#include "qdb/linalg.hpp"

// Seeded random instances for the property suites. Gaussians are hand-rolled
// from the raw engine stream so that reports are reproducible across
// standard-library implementations.

namespace qdb::rnd {

using Rng = std::mt19937_64;

double uniform(Rng& rng);                    // [0,1)
double gaussian(Rng& rng);
cd cgaussian(Rng& rng);

Mat ginibre(Rng& rng, int rows, int cols);   // i.i.d. complex Gaussian entries
Mat hermitian(Rng& rng, int d, double scale = 1.0);
Mat psd(Rng& rng, int d);
Mat density(Rng& rng, int d, double floor_frac = 0.05);  // full rank
Mat traceless_hermitian(Rng& rng, int d, double scale = 1.0);
Vec unit_vec(Rng& rng, int d);
// Derivative that keeps rho + t*drho a state near t=0.
Mat state_derivative(Rng& rng, const Mat& rho);
std::vector<Mat> kraus_set(Rng& rng, int din, int dout, int count);

}  // namespace qdb::rnd

#endif
