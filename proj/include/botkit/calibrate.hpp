#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "botkit/common.hpp"

namespace botkit::calibrate {

// Logistic map sigma(a*s + b) over raw scores. a > 0, so calibration is
// strictly increasing and leaves every score ordering (and hence AUC) intact.
struct PlattParams {
    double a = 1.0;
    double b = 0.0;
};

// Maximum-likelihood logistic fit of label on score, with Platt's smoothed
// targets so separable data still has a finite optimum. Damped Newton, at most
// 100 iterations, 1e-10 tolerance on the log-likelihood. Throws numeric_error
// when the fitted slope is not positive (scores anti-correlated with labels or
// carrying no signal).
PlattParams fit_platt(std::span<const double> scores, std::span<const int> labels);

double apply_platt(const PlattParams& p, double s);

// Density on [0,1] in the Bernstein basis: sum_k w_k * C(n,k) s^k (1-s)^(n-k)
// with w_k >= 0. The exact integral is sum_k w_k / (n+1).
struct BernsteinDensity {
    int degree = 10;
    std::vector<double> w;  // degree + 1 coefficients

    double operator()(double s) const;
    double integral() const;
};

// Moment-matched fit: coefficient k is the empirical mass of the k-th of
// degree+1 equal-width cells, renormalized to unit integral. Requires >= 10
// samples inside [0,1].
BernsteinDensity fit_bernstein_density(std::span<const double> samples, int degree = 10);

// Bayesian posterior machinery: P(Bot|S) from class-conditional score
// densities and a prior bot prevalence.
struct CapModel {
    BernsteinDensity density_bot;
    BernsteinDensity density_human;
    double prior = 0.15;
    PlattParams platt;  // raw -> calibrated; densities are fitted on calibrated scores
};

// Posterior at score s:
//   prior * L_bot(s) / (L_bot(s) * prior + L_human(s) * (1 - prior))
// A 1e-9 floor is added to both likelihoods when either vanishes. Equal
// likelihoods (including the both-zero case) return the prior exactly.
double compute_cap(const CapModel& m, double s);

// Convenience: calibrate a raw score, then evaluate the posterior there.
double cap_from_raw(const CapModel& m, double raw);

// Fits the Platt map on (scores, labels), then Bernstein densities of the
// calibrated scores per class.
CapModel fit_cap_model(std::span<const double> scores, std::span<const int> labels,
                       double prior = 0.15, int degree = 10);

// Display rescaling of a unit-interval score to the 0-5 scale, one decimal,
// ties rounded half-to-even. Input is clamped to [0,1].
double display_score(double raw);
std::string format_display_score(double display);

constexpr int kCapFormatVersion = 1;

std::string cap_to_json(const CapModel& m);
CapModel cap_from_json(const std::string& text);
void save_cap_model(const CapModel& m, const std::string& path);
CapModel load_cap_model(const std::string& path);

}  // namespace botkit::calibrate
