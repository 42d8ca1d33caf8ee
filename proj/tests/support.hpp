#pragma once

#include <random>

#include "oracles.hpp"
#include "stosc/models.hpp"

namespace testing_support {

inline stosc::CoupledOscillatorSpec make_spec(const oracle::Matrix& lambda, const oracle::Matrix& pi,
                                              oracle::Vector x0 = {}, oracle::Vector y0 = {},
                                              double t0 = 0.0) {
    const auto d = lambda.rows();
    if (x0.size() == 0) x0 = oracle::Vector::Zero(d);
    if (y0.size() == 0) y0 = oracle::Vector::Zero(d);
    return stosc::CoupledOscillatorSpec(stosc::SymMatrix(stosc::Mat(lambda)), stosc::Mat(pi), x0, y0, t0);
}

// The coupled two-dimensional model used throughout: eigenvalues
// (3 +- sqrt 2) / 2, unit noise on each velocity.
inline stosc::CoupledOscillatorSpec reference_d2() {
    oracle::Matrix l(2, 2);
    l << 2.0, 0.5, 0.5, 1.0;
    return make_spec(l, oracle::Matrix::Identity(2, 2));
}

inline stosc::CoupledOscillatorSpec scalar_spec(double alpha, double sigma, double x0 = 0.0, double y0 = 0.0) {
    return make_spec(oracle::Matrix::Constant(1, 1, alpha), oracle::Matrix::Constant(1, 1, sigma),
                     oracle::Vector::Constant(1, x0), oracle::Vector::Constant(1, y0));
}

enum class SpectrumKind { generic, degenerate, sign_flipped };

// Spectrum bounded away from zero: magnitudes in [0.3, 2.5].
inline oracle::Vector random_spectrum(int d, SpectrumKind kind, std::mt19937_64& gen) {
    std::uniform_real_distribution<double> mag(0.3, 2.5);
    std::bernoulli_distribution coin(0.5);
    oracle::Vector lam(d);
    for (int k = 0; k < d; ++k) lam(k) = mag(gen) * (coin(gen) ? 1.0 : -1.0);
    if (d >= 2 && kind == SpectrumKind::degenerate) lam(1) = lam(0);
    if (d >= 2 && kind == SpectrumKind::sign_flipped) lam(1) = -lam(0);
    return lam;
}

inline stosc::CoupledOscillatorSpec random_spec(int d, int m, SpectrumKind kind, std::mt19937_64& gen,
                                                bool random_initial = true) {
    const oracle::Matrix l = oracle::with_spectrum(random_spectrum(d, kind, gen), gen);
    std::normal_distribution<double> n01;
    oracle::Matrix pi(d, m);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < m; ++j) pi(i, j) = n01(gen);
    oracle::Vector x0 = oracle::Vector::Zero(d);
    oracle::Vector y0 = oracle::Vector::Zero(d);
    if (random_initial) {
        for (int i = 0; i < d; ++i) {
            x0(i) = n01(gen);
            y0(i) = n01(gen);
        }
    }
    return make_spec(l, pi, x0, y0);
}

}  // namespace testing_support
