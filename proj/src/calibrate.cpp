#include "botkit/calibrate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

using nlohmann::json;

namespace botkit::calibrate {

namespace {

double sigmoid(double t) {
    if (t >= 0) return 1.0 / (1.0 + std::exp(-t));
    double e = std::exp(t);
    return e / (1.0 + e);
}

// C(n,k) s^k (1-s)^(n-k) for k = 0..n.
std::vector<double> bernstein_basis(int n, double s) {
    std::vector<double> out(static_cast<size_t>(n) + 1);
    double binom = 1.0;
    for (int k = 0; k <= n; ++k) {
        out[static_cast<size_t>(k)] = binom * std::pow(s, k) * std::pow(1.0 - s, n - k);
        binom = binom * static_cast<double>(n - k) / static_cast<double>(k + 1);
    }
    return out;
}

// Negative log-likelihood with targets t_i, numerically stable in both tails.
double platt_nll(std::span<const double> scores, std::span<const double> targets, double a,
                 double b) {
    double nll = 0.0;
    for (size_t i = 0; i < scores.size(); ++i) {
        double z = a * scores[i] + b;
        double t = targets[i];
        if (z >= 0)
            nll += (1.0 - t) * z + std::log1p(std::exp(-z));
        else
            nll += -t * z + std::log1p(std::exp(z));
    }
    return nll;
}

}  // namespace

PlattParams fit_platt(std::span<const double> scores, std::span<const int> labels) {
    if (scores.size() != labels.size())
        throw data_error("fit_platt: scores and labels differ in length");
    size_t pos = 0, neg = 0;
    for (int l : labels) {
        if (l == 1)
            ++pos;
        else if (l == 0)
            ++neg;
        else
            throw data_error("fit_platt: labels must be 0 or 1");
    }
    if (pos == 0 || neg == 0) throw data_error("fit_platt: both classes must be present");

    // Platt's smoothed targets keep the optimum finite on separable data.
    double t_pos = (static_cast<double>(pos) + 1.0) / (static_cast<double>(pos) + 2.0);
    double t_neg = 1.0 / (static_cast<double>(neg) + 2.0);
    std::vector<double> targets(scores.size());
    for (size_t i = 0; i < scores.size(); ++i) targets[i] = labels[i] == 1 ? t_pos : t_neg;

    double a = 0.0;
    double b = std::log((static_cast<double>(pos) + 1.0) / (static_cast<double>(neg) + 1.0));
    double nll = platt_nll(scores, targets, a, b);

    constexpr int kMaxIter = 100;
    constexpr double kTol = 1e-10;
    bool converged = false;
    for (int iter = 0; iter < kMaxIter; ++iter) {
        double g_a = 0, g_b = 0;
        double h_aa = 1e-12, h_ab = 0, h_bb = 1e-12;
        for (size_t i = 0; i < scores.size(); ++i) {
            double s = scores[i];
            double p = sigmoid(a * s + b);
            double d = p - targets[i];
            double w = p * (1.0 - p);
            g_a += d * s;
            g_b += d;
            h_aa += w * s * s;
            h_ab += w * s;
            h_bb += w;
        }
        double det = h_aa * h_bb - h_ab * h_ab;
        if (det <= 0) throw numeric_error("fit_platt: singular Hessian");
        double step_a = -(h_bb * g_a - h_ab * g_b) / det;
        double step_b = -(-h_ab * g_a + h_aa * g_b) / det;

        double scale = 1.0;
        bool stepped = false;
        double next_nll = nll, na = a, nb = b;
        while (scale >= 1e-12) {
            double ta = a + scale * step_a;
            double tb = b + scale * step_b;
            double t_nll = platt_nll(scores, targets, ta, tb);
            if (t_nll <= nll) {
                na = ta;
                nb = tb;
                next_nll = t_nll;
                stepped = true;
                break;
            }
            scale /= 2.0;
        }
        if (!stepped) {
            // No damping of the Newton step improves the likelihood: stationary.
            converged = true;
            break;
        }
        double improvement = nll - next_nll;
        a = na;
        b = nb;
        nll = next_nll;
        if (improvement < kTol) {
            converged = true;
            break;
        }
    }
    if (!converged) throw numeric_error("fit_platt: no convergence after 100 iterations");
    if (!(a > 0))
        throw numeric_error(
            "fit_platt: fitted slope is not positive; training scores are anti-correlated "
            "with labels or carry no signal");
    return PlattParams{a, b};
}

double apply_platt(const PlattParams& p, double s) {
    return sigmoid(p.a * s + p.b);
}

double BernsteinDensity::operator()(double s) const {
    if (!(s >= 0.0 && s <= 1.0)) throw data_error("BernsteinDensity: point outside [0,1]");
    std::vector<double> basis = bernstein_basis(degree, s);
    double out = 0.0;
    for (size_t k = 0; k < basis.size(); ++k) out += w[k] * basis[k];
    return out;
}

double BernsteinDensity::integral() const {
    double sum = 0.0;
    for (double x : w) sum += x;
    return sum / static_cast<double>(degree + 1);
}

BernsteinDensity fit_bernstein_density(std::span<const double> samples, int degree) {
    if (samples.empty()) throw data_error("fit_bernstein_density: empty input");
    if (samples.size() < 10) throw data_error("fit_bernstein_density: need at least 10 samples");
    if (degree < 1) throw config_error("fit_bernstein_density: degree must be >= 1");
    for (double s : samples)
        if (!(s >= 0.0 && s <= 1.0))
            throw data_error("fit_bernstein_density: sample outside [0,1]");

    // Moment matching: coefficient k carries the empirical mass of the k-th of
    // degree+1 equal-width cells, scaled so the closed-form integral is 1. A
    // direct least-squares fit in this basis is ill-conditioned and lets
    // histogram noise blow up the endpoint coefficients.
    size_t cells = static_cast<size_t>(degree) + 1;
    std::vector<double> mass(cells, 0.0);
    for (double s : samples) {
        int c = static_cast<int>(std::ceil(s * static_cast<double>(cells))) - 1;
        c = std::clamp(c, 0, static_cast<int>(cells) - 1);
        mass[static_cast<size_t>(c)] += 1.0;
    }
    BernsteinDensity density;
    density.degree = degree;
    density.w.resize(cells);
    for (size_t c = 0; c < cells; ++c)
        density.w[c] = mass[c] * static_cast<double>(cells) / static_cast<double>(samples.size());
    double integral = density.integral();
    if (!(integral > 0))
        throw numeric_error("fit_bernstein_density: degenerate fit with zero mass");
    for (double& x : density.w) x /= integral;
    return density;
}

double compute_cap(const CapModel& m, double s) {
    if (!(s >= 0.0 && s <= 1.0)) throw data_error("compute_cap: score outside [0,1]");
    constexpr double kFloor = 1e-9;
    double lb = m.density_bot(s);
    double lh = m.density_human(s);
    // Equal likelihoods mean the evidence term is 1, so the posterior is the
    // prior; returning it directly keeps that case exact (and covers 0/0).
    if (lb == lh) return m.prior;
    // The floor only guards vanishing likelihoods; strictly positive densities
    // evaluate the Bayes ratio unperturbed.
    if (lb <= 0.0 || lh <= 0.0) {
        lb += kFloor;
        lh += kFloor;
    }
    return m.prior * lb / (lb * m.prior + lh * (1.0 - m.prior));
}

double cap_from_raw(const CapModel& m, double raw) {
    return compute_cap(m, std::clamp(apply_platt(m.platt, raw), 0.0, 1.0));
}

CapModel fit_cap_model(std::span<const double> scores, std::span<const int> labels, double prior,
                       int degree) {
    if (!(prior > 0.0 && prior < 1.0)) throw config_error("fit_cap_model: prior must be in (0,1)");
    CapModel m;
    m.prior = prior;
    m.platt = fit_platt(scores, labels);
    std::vector<double> cal_bot, cal_human;
    for (size_t i = 0; i < scores.size(); ++i) {
        double c = apply_platt(m.platt, scores[i]);
        (labels[i] == 1 ? cal_bot : cal_human).push_back(c);
    }
    m.density_bot = fit_bernstein_density(cal_bot, degree);
    m.density_human = fit_bernstein_density(cal_human, degree);
    return m;
}

double display_score(double raw) {
    double clamped = std::clamp(raw, 0.0, 1.0);
    double scaled = clamped * 50.0;
    // Snap to an exact half when the product only missed it through float
    // noise, then let round-to-nearest-even settle ties.
    double half = std::round(scaled * 2.0) / 2.0;
    if (std::abs(scaled - half) < 1e-7) scaled = half;
    double rounded = std::nearbyint(scaled);
    return rounded / 10.0;
}

std::string format_display_score(double display) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%.1f", display);
    return std::string(buf);
}

namespace {

json density_to_json(const BernsteinDensity& d) {
    return json(d.w);
}

BernsteinDensity density_from_json(const json& arr, int degree) {
    BernsteinDensity d;
    d.degree = degree;
    for (const auto& v : arr) d.w.push_back(v.get<double>());
    if (d.w.size() != static_cast<size_t>(degree) + 1)
        throw data_error("cap model: coefficient count does not match degree");
    for (double v : d.w)
        if (v < 0) throw data_error("cap model: negative Bernstein coefficient");
    return d;
}

}  // namespace

std::string cap_to_json(const CapModel& m) {
    json j;
    j["format_version"] = kCapFormatVersion;
    j["kind"] = "cap";
    j["prior"] = m.prior;
    j["degree"] = m.density_bot.degree;
    j["w_bot"] = density_to_json(m.density_bot);
    j["w_human"] = density_to_json(m.density_human);
    j["platt"] = {{"a", m.platt.a}, {"b", m.platt.b}};
    return j.dump();
}

CapModel cap_from_json(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw data_error("cap model file is not valid JSON");
    if (!j.contains("format_version") || j.at("format_version").get<int>() != kCapFormatVersion)
        throw data_error("unsupported cap model format_version (expected " +
                         std::to_string(kCapFormatVersion) + ")");
    if (!j.contains("kind") || j.at("kind").get<std::string>() != "cap")
        throw data_error("model file is not a cap model");
    CapModel m;
    m.prior = j.at("prior").get<double>();
    if (!(m.prior > 0.0 && m.prior < 1.0)) throw data_error("cap model: prior outside (0,1)");
    int degree = j.at("degree").get<int>();
    m.density_bot = density_from_json(j.at("w_bot"), degree);
    m.density_human = density_from_json(j.at("w_human"), degree);
    m.platt.a = j.at("platt").at("a").get<double>();
    m.platt.b = j.at("platt").at("b").get<double>();
    if (!(m.platt.a > 0)) throw data_error("cap model: Platt slope must be positive");
    return m;
}

void save_cap_model(const CapModel& m, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw data_error("cannot write cap model: " + path);
    out << cap_to_json(m) << '\n';
}

CapModel load_cap_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw data_error("cannot open cap model: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return cap_from_json(text);
}

}  // namespace botkit::calibrate
