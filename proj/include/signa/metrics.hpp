#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "signa/errors.hpp"

namespace signa {

/// One precision/recall pair with its Fβ.
struct Scores {
    double precision = 0.0;
    double recall = 0.0;
    double fbeta = 0.0;
};

inline double fbeta_score(double p, double r, int beta) {
    const double b2 = static_cast<double>(beta) * beta;
    const double denom = b2 * p + r;
    if (denom <= 0.0) return 0.0;
    return (1.0 + b2) * p * r / denom;
}

namespace detail {

// Zero-denominator convention, applied at both granularities: an empty
// prediction (or target) side scores 1 when the other side is also empty,
// else 0.
inline double safe_ratio(double tp, double denom, double other_side) {
    if (denom > 0.0) return tp / denom;
    return other_side > 0.0 ? 0.0 : 1.0;
}

inline void check_metric_args(std::size_t pred, std::size_t target, int n, int c, int beta) {
    if (n < 1 || c < 1) throw ShapeError("metrics: need n >= 1 and c >= 1");
    if (pred != static_cast<std::size_t>(n) * c || target != pred)
        throw ShapeError("metrics: prediction/target sizes do not match n*c");
    if (beta != 1 && beta != 2)
        throw ConfigError("metrics: beta must be 1 or 2, got " + std::to_string(beta));
}

}  // namespace detail

/// Example-based precision/recall averaged over images, with Fβ on the
/// aggregates.
inline Scores example_based_scores(const std::vector<std::uint8_t>& pred,
                                   const std::vector<std::uint8_t>& target, int n, int c,
                                   int beta) {
    detail::check_metric_args(pred.size(), target.size(), n, c, beta);
    double psum = 0.0, rsum = 0.0;
    for (int i = 0; i < n; ++i) {
        int tp = 0, predicted = 0, actual = 0;
        for (int j = 0; j < c; ++j) {
            const std::uint8_t p = pred[static_cast<std::size_t>(i) * c + j];
            const std::uint8_t t = target[static_cast<std::size_t>(i) * c + j];
            tp += p & t;
            predicted += p;
            actual += t;
        }
        psum += detail::safe_ratio(tp, predicted, actual);
        rsum += detail::safe_ratio(tp, actual, predicted);
    }
    Scores s;
    s.precision = psum / n;
    s.recall = rsum / n;
    s.fbeta = fbeta_score(s.precision, s.recall, beta);
    return s;
}

/// Label-based precision/recall averaged over classes, with Fβ on the
/// aggregates.
inline Scores label_based_scores(const std::vector<std::uint8_t>& pred,
                                 const std::vector<std::uint8_t>& target, int n, int c,
                                 int beta) {
    detail::check_metric_args(pred.size(), target.size(), n, c, beta);
    double psum = 0.0, rsum = 0.0;
    for (int j = 0; j < c; ++j) {
        int tp = 0, predicted = 0, actual = 0;
        for (int i = 0; i < n; ++i) {
            const std::uint8_t p = pred[static_cast<std::size_t>(i) * c + j];
            const std::uint8_t t = target[static_cast<std::size_t>(i) * c + j];
            tp += p & t;
            predicted += p;
            actual += t;
        }
        psum += detail::safe_ratio(tp, predicted, actual);
        rsum += detail::safe_ratio(tp, actual, predicted);
    }
    Scores s;
    s.precision = psum / c;
    s.recall = rsum / c;
    s.fbeta = fbeta_score(s.precision, s.recall, beta);
    return s;
}

struct PerClassRow {
    std::string label;
    double f1 = 0.0;
    double precision = 0.0;
    double recall = 0.0;
};

/// Per-class F1/P/R rows in vocabulary order. Classes absent from both
/// predictions and targets score 1.0 across the board (vacuous perfection).
inline std::vector<PerClassRow> per_class_report(const std::vector<std::uint8_t>& pred,
                                                 const std::vector<std::uint8_t>& target, int n,
                                                 const std::vector<std::string>& vocabulary) {
    const int c = static_cast<int>(vocabulary.size());
    detail::check_metric_args(pred.size(), target.size(), n, c, 1);
    std::vector<PerClassRow> rows;
    rows.reserve(vocabulary.size());
    for (int j = 0; j < c; ++j) {
        int tp = 0, predicted = 0, actual = 0;
        for (int i = 0; i < n; ++i) {
            const std::uint8_t p = pred[static_cast<std::size_t>(i) * c + j];
            const std::uint8_t t = target[static_cast<std::size_t>(i) * c + j];
            tp += p & t;
            predicted += p;
            actual += t;
        }
        PerClassRow row;
        row.label = vocabulary[static_cast<std::size_t>(j)];
        row.precision = detail::safe_ratio(tp, predicted, actual);
        row.recall = detail::safe_ratio(tp, actual, predicted);
        row.f1 = fbeta_score(row.precision, row.recall, 1);
        rows.push_back(std::move(row));
    }
    return rows;
}

/// The full metric suite at both granularities plus the per-class table.
struct MetricReport {
    double p_e = 0, r_e = 0, f1_e = 0, f2_e = 0;
    double p_l = 0, r_l = 0, f1_l = 0, f2_l = 0;
    std::vector<PerClassRow> per_class;
    int examples = 0;
    int classes = 0;
};

inline MetricReport evaluate_predictions(const std::vector<std::uint8_t>& pred,
                                         const std::vector<std::uint8_t>& target, int n,
                                         const std::vector<std::string>& vocabulary) {
    const int c = static_cast<int>(vocabulary.size());
    MetricReport r;
    Scores e1 = example_based_scores(pred, target, n, c, 1);
    Scores e2 = example_based_scores(pred, target, n, c, 2);
    Scores l1 = label_based_scores(pred, target, n, c, 1);
    Scores l2 = label_based_scores(pred, target, n, c, 2);
    r.p_e = e1.precision;
    r.r_e = e1.recall;
    r.f1_e = e1.fbeta;
    r.f2_e = e2.fbeta;
    r.p_l = l1.precision;
    r.r_l = l1.recall;
    r.f1_l = l1.fbeta;
    r.f2_l = l2.fbeta;
    r.per_class = per_class_report(pred, target, n, vocabulary);
    r.examples = n;
    r.classes = c;
    return r;
}

}  // namespace signa
