#include "botkit/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <sstream>

namespace botkit::eval {

namespace {

// CSV cells use the shortest round-trip float form, so reports are
// reproducible byte for byte.
std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    double back = std::strtod(buf, nullptr);
    if (back == v) {
        for (int prec = 1; prec <= 16; ++prec) {
            char probe[40];
            std::snprintf(probe, sizeof(probe), "%.*g", prec, v);
            if (std::strtod(probe, nullptr) == v) return probe;
        }
    }
    return buf;
}

}  // namespace

std::vector<double> midranks(std::span<const double> values) {
    size_t n = values.size();
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        if (values[a] != values[b]) return values[a] < values[b];
        return a < b;
    });
    std::vector<double> ranks(n, 0.0);
    size_t i = 0;
    while (i < n) {
        size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        double rank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
        for (size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
        i = j + 1;
    }
    return ranks;
}

double auc(std::span<const double> scores, std::span<const int> labels) {
    if (scores.size() != labels.size()) throw data_error("auc: scores and labels differ in length");
    size_t pos = 0, neg = 0;
    for (int l : labels) {
        if (l == 1)
            ++pos;
        else if (l == 0)
            ++neg;
        else
            throw data_error("auc: labels must be 0 or 1");
    }
    if (pos == 0 || neg == 0) throw data_error("auc: both classes must be present");
    std::vector<double> ranks = midranks(scores);
    double rank_sum = 0.0;
    for (size_t i = 0; i < labels.size(); ++i)
        if (labels[i] == 1) rank_sum += ranks[i];
    double u = rank_sum - static_cast<double>(pos) * (static_cast<double>(pos) + 1.0) / 2.0;
    return u / (static_cast<double>(pos) * static_cast<double>(neg));
}

double spearman(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw data_error("spearman: length mismatch");
    if (a.size() < 2) throw data_error("spearman: need at least 2 points");
    std::vector<double> ra = midranks(a);
    std::vector<double> rb = midranks(b);
    double n = static_cast<double>(a.size());
    double ma = 0, mb = 0;
    for (size_t i = 0; i < a.size(); ++i) {
        ma += ra[i];
        mb += rb[i];
    }
    ma /= n;
    mb /= n;
    double cov = 0, va = 0, vb = 0;
    for (size_t i = 0; i < a.size(); ++i) {
        double da = ra[i] - ma;
        double db = rb[i] - mb;
        cov += da * db;
        va += da * da;
        vb += db * db;
    }
    if (va == 0 || vb == 0) throw numeric_error("spearman: constant input has no rank ordering");
    return cov / std::sqrt(va * vb);
}

std::vector<int> stratified_folds(std::span<const int> labels, int folds, uint64_t seed) {
    if (folds < 2) throw config_error("stratified_folds: need at least 2 folds");
    std::vector<int> assignment(labels.size(), 0);
    for (int cls = 0; cls <= 1; ++cls) {
        std::vector<size_t> idx;
        for (size_t i = 0; i < labels.size(); ++i)
            if (labels[i] == cls) idx.push_back(i);
        Rng rng(derive_seed(seed, "folds/" + std::to_string(cls)));
        std::vector<uint32_t> perm = rng.permutation(static_cast<uint32_t>(idx.size()));
        for (size_t k = 0; k < idx.size(); ++k)
            assignment[idx[perm[k]]] = static_cast<int>(k % static_cast<size_t>(folds));
    }
    return assignment;
}

std::vector<double> out_of_fold_scores(std::span<const features::FeatureVector> rows,
                                       std::span<const int> labels,
                                       const forest::TrainParams& params, uint64_t seed,
                                       int folds, unsigned threads) {
    if (rows.size() != labels.size())
        throw data_error("out_of_fold_scores: rows and labels differ in length");
    std::vector<int> fold_of = stratified_folds(labels, folds, seed);
    std::vector<double> scores(rows.size(), 0.0);
    for (int f = 0; f < folds; ++f) {
        std::vector<features::FeatureVector> train_rows;
        std::vector<int> train_labels;
        std::vector<size_t> test_idx;
        for (size_t i = 0; i < rows.size(); ++i) {
            if (fold_of[i] == f) {
                test_idx.push_back(i);
            } else {
                train_rows.push_back(rows[i]);
                train_labels.push_back(labels[i]);
            }
        }
        if (test_idx.empty()) continue;
        forest::Forest model = forest::train_forest(train_rows, train_labels, params,
                                                    derive_seed(seed, "fold/" + std::to_string(f)),
                                                    threads);
        for (size_t i : test_idx) scores[i] = forest::score(model, rows[i]);
    }
    return scores;
}

double cv_auc(std::span<const features::FeatureVector> rows, std::span<const int> labels,
              const forest::TrainParams& params, uint64_t seed, int folds, unsigned threads) {
    std::vector<double> scores = out_of_fold_scores(rows, labels, params, seed, folds, threads);
    return auc(scores, labels);
}

std::string GeneralizabilityMatrix::to_csv() const {
    std::ostringstream out;
    out << "train\\test";
    for (const auto& n : names) out << ',' << n;
    out << '\n';
    for (size_t i = 0; i < names.size(); ++i) {
        out << names[i];
        for (size_t j = 0; j < names.size(); ++j) out << ',' << fmt(cells[i][j]);
        out << '\n';
    }
    return out.str();
}

GeneralizabilityMatrix generalizability_matrix(std::span<const ingest::LabeledDataset> datasets,
                                               const forest::TrainParams& params, uint64_t seed,
                                               unsigned threads, const std::string& schema_id) {
    if (datasets.size() < 2) throw data_error("generalizability_matrix: need at least 2 datasets");
    size_t n = datasets.size();
    std::vector<features::DataMatrix> mats;
    mats.reserve(n);
    for (const auto& ds : datasets) {
        features::DataMatrix m = features::extract_matrix(ds, schema_id);
        bool has_bot = false, has_human = false;
        for (int l : m.labels) (l == 1 ? has_bot : has_human) = true;
        if (!has_bot || !has_human)
            throw data_error("generalizability_matrix: dataset '" + ds.name +
                             "' has a single class");
        mats.push_back(std::move(m));
    }
    GeneralizabilityMatrix out;
    for (const auto& ds : datasets) out.names.push_back(ds.name);
    out.cells.assign(n, std::vector<double>(n, 0.0));

    // Cell seeds are derived from (i, j), so parallel order cannot matter.
    parallel_for(n * n, threads, [&](size_t cell) {
        size_t i = cell / n;
        size_t j = cell % n;
        uint64_t cell_seed =
            derive_seed(seed, "cell/" + std::to_string(i) + "/" + std::to_string(j));
        if (i == j) {
            out.cells[i][j] = cv_auc(mats[i].rows, mats[i].labels, params, cell_seed, 5, 1);
        } else {
            forest::Forest model =
                forest::train_forest(mats[i].rows, mats[i].labels, params, cell_seed, 1);
            std::vector<double> scores(mats[j].rows.size());
            for (size_t k = 0; k < mats[j].rows.size(); ++k)
                scores[k] = forest::score(model, mats[j].rows[k]);
            out.cells[i][j] = auc(scores, mats[j].labels);
        }
    });
    return out;
}

namespace {

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    size_t n = v.size();
    if (n == 0) return 0.0;
    if (n % 2 == 1) return v[n / 2];
    return (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

double skewness_of(const std::vector<double>& v) {
    double n = static_cast<double>(v.size());
    if (v.size() < 2) return 0.0;
    double mean = 0;
    for (double x : v) mean += x;
    mean /= n;
    double m2 = 0, m3 = 0;
    for (double x : v) {
        double d = x - mean;
        m2 += d * d;
        m3 += d * d * d;
    }
    m2 /= n;
    m3 /= n;
    if (m2 <= 0) return 0.0;
    return m3 / std::pow(m2, 1.5);
}

}  // namespace

ScoreDistributions score_distributions(std::span<const double> scores,
                                       std::span<const std::string> class_tags, int bins) {
    if (scores.size() != class_tags.size())
        throw data_error("score_distributions: scores and tags differ in length");
    if (scores.empty()) throw data_error("score_distributions: empty input");
    if (bins < 1) throw config_error("score_distributions: bins must be >= 1");

    ScoreDistributions out;
    out.edges.resize(static_cast<size_t>(bins) + 1);
    for (int b = 0; b <= bins; ++b)
        out.edges[static_cast<size_t>(b)] = static_cast<double>(b) / static_cast<double>(bins);

    std::map<std::string, std::vector<double>> by_class;
    for (size_t i = 0; i < scores.size(); ++i) {
        double s = scores[i];
        if (!(s >= 0.0 && s <= 1.0))
            throw data_error("score_distributions: score outside [0,1]");
        by_class[class_tags[i]].push_back(s);
    }
    for (auto& [tag, vals] : by_class) {
        ClassHistogram h;
        h.class_tag = tag;
        h.count = vals.size();
        h.mass.assign(static_cast<size_t>(bins), 0.0);
        for (double s : vals) {
            // Right-closed bins (lo, hi]; zero lands in the first bin.
            int b = static_cast<int>(std::ceil(s * bins)) - 1;
            b = std::clamp(b, 0, bins - 1);
            h.mass[static_cast<size_t>(b)] += 1.0;
        }
        for (double& m : h.mass) m /= static_cast<double>(vals.size());
        h.median = median_of(vals);
        h.skewness = skewness_of(vals);
        out.classes.push_back(std::move(h));
    }
    return out;
}

ScoreDistributions score_distributions(const forest::Forest& model,
                                       const ingest::LabeledDataset& ds, int bins,
                                       unsigned threads) {
    if (ds.accounts.empty()) throw data_error("score_distributions: empty dataset");
    features::DataMatrix m = features::extract_matrix(ds, model.schema_id);
    bool has_bot = false, has_human = false;
    for (int l : m.labels) (l == 1 ? has_bot : has_human) = true;
    if (!has_bot || !has_human)
        throw data_error("score_distributions: dataset '" + ds.name +
                         "' has an empty class; need both humans and bots");
    std::vector<double> scores = forest::score_all(model, m.rows, threads);
    return score_distributions(scores, m.class_tags, bins);
}

std::string ScoreDistributions::to_csv() const {
    std::ostringstream out;
    out << "class,bin,lo,hi,mass\n";
    for (const auto& h : classes)
        for (size_t b = 0; b + 1 < edges.size(); ++b)
            out << h.class_tag << ',' << b << ',' << fmt(edges[b]) << ',' << fmt(edges[b + 1])
                << ',' << fmt(h.mass[b]) << '\n';
    return out.str();
}

std::string ScoreDistributions::stats_csv() const {
    std::ostringstream out;
    out << "class,count,median,skewness\n";
    for (const auto& h : classes)
        out << h.class_tag << ',' << h.count << ',' << fmt(h.median) << ',' << fmt(h.skewness)
            << '\n';
    return out.str();
}

std::vector<SweepRow> threshold_sweep(std::span<const double> scores, std::span<const int> labels,
                                      std::span<const double> thresholds) {
    if (scores.size() != labels.size())
        throw data_error("threshold_sweep: scores and labels differ in length");
    for (double t : thresholds)
        if (!(t >= 0.0 && t <= 1.0))
            throw data_error("threshold_sweep: thresholds must lie in [0,1]");
    size_t positives = 0;
    for (int l : labels) positives += (l == 1);
    std::vector<SweepRow> rows;
    rows.reserve(thresholds.size());
    for (double t : thresholds) {
        size_t tp = 0, fp = 0;
        for (size_t i = 0; i < scores.size(); ++i) {
            if (scores[i] >= t) {
                if (labels[i] == 1)
                    ++tp;
                else
                    ++fp;
            }
        }
        SweepRow r;
        r.threshold = t;
        size_t called = tp + fp;
        r.precision = called > 0 ? static_cast<double>(tp) / static_cast<double>(called) : 0.0;
        r.recall = positives > 0 ? static_cast<double>(tp) / static_cast<double>(positives) : 0.0;
        r.f1 = (r.precision + r.recall) > 0
                   ? 2.0 * r.precision * r.recall / (r.precision + r.recall)
                   : 0.0;
        r.prevalence =
            scores.empty() ? 0.0 : static_cast<double>(called) / static_cast<double>(scores.size());
        rows.push_back(r);
    }
    return rows;
}

std::string sweep_to_csv(std::span<const SweepRow> rows) {
    std::ostringstream out;
    out << "threshold,precision,recall,f1,bot_prevalence\n";
    for (const auto& r : rows)
        out << fmt(r.threshold) << ',' << fmt(r.precision) << ',' << fmt(r.recall) << ','
            << fmt(r.f1) << ',' << fmt(r.prevalence) << '\n';
    return out.str();
}

}  // namespace botkit::eval
