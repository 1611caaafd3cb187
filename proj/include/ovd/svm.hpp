#pragma once

#include <algorithm>
#include <array>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "ovd/detail/random.hpp"
#include "ovd/errors.hpp"
#include "ovd/features.hpp"
#include "ovd/occupancy.hpp"

namespace ovd {

enum class KernelKind { Linear, Rbf };

struct KernelParams {
    KernelKind kind = KernelKind::Rbf;
    double gamma = 0.1; // rbf only
};

inline double kernel_eval(const KernelParams& k, const Eigen::VectorXd& x,
                          const Eigen::VectorXd& y) {
    switch (k.kind) {
        case KernelKind::Linear: return x.dot(y);
        case KernelKind::Rbf: return std::exp(-k.gamma * (x - y).squaredNorm());
    }
    throw ConfigError("invalid kernel kind");
}

/// One soft-margin binary classifier: f(x) = sum_i coeff_i k(sv_i, x) + bias,
/// coeff_i = alpha_i * y_i over the support vectors.
struct BinarySvmModel {
    Eigen::MatrixXd support_vectors; // n_sv x d
    Eigen::VectorXd coeffs;          // n_sv
    double bias = 0.0;
};

inline double decision_value(const BinarySvmModel& m, const KernelParams& k,
                             const Eigen::VectorXd& x) {
    double f = m.bias;
    for (Eigen::Index i = 0; i < m.support_vectors.rows(); ++i) {
        f += m.coeffs(i) * kernel_eval(k, m.support_vectors.row(i).transpose(), x);
    }
    return f;
}

struct BinaryTrainResult {
    BinarySvmModel model;
    Eigen::VectorXd alpha;  // full dual solution, 0 <= alpha_i <= C
    double dual_objective;  // sum(alpha) - 0.5 * alpha' Q alpha
    long iterations;
};

inline constexpr double kSmoKktTolerance = 1e-3;
inline constexpr long kSmoMaxPasses = 10000; // full-sweep equivalents

/// Solves the soft-margin dual with sequential minimal optimization using
/// maximal-violating-pair working set selection. Stops when the KKT
/// violation drops below kSmoKktTolerance. Each pairwise update keeps
/// sum(alpha_i * y_i) = 0 exactly.
inline BinaryTrainResult train_binary(const Eigen::MatrixXd& X,
                                      const std::vector<int>& y, double C,
                                      const KernelParams& kernel) {
    const Eigen::Index n = X.rows();
    if (n < 2 || static_cast<Eigen::Index>(y.size()) != n) {
        throw ConfigError("binary SVM needs at least two labeled samples");
    }
    if (!(C > 0.0)) throw ConfigError("C must be strictly positive");
    if (kernel.kind == KernelKind::Rbf && !(kernel.gamma > 0.0)) {
        throw ConfigError("rbf gamma must be strictly positive");
    }
    bool has_pos = false, has_neg = false;
    for (int label : y) {
        if (label == 1) has_pos = true;
        else if (label == -1) has_neg = true;
        else throw ConfigError("binary labels must be +1 or -1");
    }
    if (!has_pos || !has_neg) {
        throw ConfigError("degenerate labels: both classes must be present");
    }

    // Full kernel matrix; the pairwise problems here are small.
    Eigen::MatrixXd K(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        K(i, i) = kernel_eval(kernel, X.row(i).transpose(), X.row(i).transpose());
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double v = kernel_eval(kernel, X.row(i).transpose(), X.row(j).transpose());
            K(i, j) = v;
            K(j, i) = v;
        }
    }

    Eigen::VectorXd alpha = Eigen::VectorXd::Zero(n);
    // gradient of 0.5 a'Qa - e'a with Q_ij = y_i y_j K_ij; starts at -1
    Eigen::VectorXd grad = Eigen::VectorXd::Constant(n, -1.0);
    const long max_iterations = kSmoMaxPasses * static_cast<long>(n);
    long iterations = 0;

#ifndef NDEBUG
    auto objective_of = [&](const Eigen::VectorXd& a) {
        double quad = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j < n; ++j) {
                quad += a(i) * a(j) * y[static_cast<std::size_t>(i)] *
                        y[static_cast<std::size_t>(j)] * K(i, j);
            }
        }
        return a.sum() - 0.5 * quad;
    };
    double last_objective = 0.0;
#endif

    double m_up = 0.0, m_low = 0.0;
    while (iterations < max_iterations) {
        // maximal violating pair over the feasible index sets
        Eigen::Index i_up = -1, i_low = -1;
        m_up = -std::numeric_limits<double>::infinity();
        m_low = std::numeric_limits<double>::infinity();
        for (Eigen::Index k = 0; k < n; ++k) {
            const int yk = y[static_cast<std::size_t>(k)];
            const double v = -yk * grad(k);
            const bool in_up = (yk == 1 && alpha(k) < C) || (yk == -1 && alpha(k) > 0.0);
            const bool in_low = (yk == 1 && alpha(k) > 0.0) || (yk == -1 && alpha(k) < C);
            if (in_up && v > m_up) {
                m_up = v;
                i_up = k;
            }
            if (in_low && v < m_low) {
                m_low = v;
                i_low = k;
            }
        }
        if (i_up < 0 || i_low < 0 || m_up - m_low < kSmoKktTolerance) break;

        const int yi = y[static_cast<std::size_t>(i_up)];
        const int yj = y[static_cast<std::size_t>(i_low)];
        double eta = K(i_up, i_up) + K(i_low, i_low) - 2.0 * K(i_up, i_low);
        if (eta < 1e-12) eta = 1e-12;

        // step t moves alpha_i by yi*t and alpha_j by -yj*t
        double t = (m_up - m_low) / eta;
        const double cap_i = yi == 1 ? C - alpha(i_up) : alpha(i_up);
        const double cap_j = yj == 1 ? alpha(i_low) : C - alpha(i_low);
        t = std::min(t, std::min(cap_i, cap_j));

        alpha(i_up) += yi * t;
        alpha(i_low) -= yj * t;
        // delta alpha_i = yi*t, delta alpha_j = -yj*t =>
        // grad_k += y_k * (y_i K(k,i) (yi*t) + y_j K(k,j) (-yj*t))
        for (Eigen::Index k = 0; k < n; ++k) {
            const int yk = y[static_cast<std::size_t>(k)];
            grad(k) += yk * (K(k, i_up) * yi * (yi * t) + K(k, i_low) * yj * (-yj * t));
        }
        ++iterations;

#ifndef NDEBUG
        if (iterations % 256 == 1) {
            const double obj = objective_of(alpha);
            assert(obj + 1e-9 * std::max(1.0, std::abs(obj)) >= last_objective);
            last_objective = obj;
        }
#endif
    }

    BinaryTrainResult result;
    result.iterations = iterations;
    result.alpha = alpha;

    double quad = 0.0;
    Eigen::VectorXd decision_wo_bias = Eigen::VectorXd::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (alpha(i) == 0.0) continue;
        for (Eigen::Index j = 0; j < n; ++j) {
            decision_wo_bias(j) += alpha(i) * y[static_cast<std::size_t>(i)] * K(i, j);
        }
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        quad += alpha(i) * y[static_cast<std::size_t>(i)] * decision_wo_bias(i);
    }
    result.dual_objective = alpha.sum() - 0.5 * quad;

    // bias from free support vectors; fall back to the violation midpoint
    double bias_sum = 0.0;
    int free_count = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (alpha(i) > 1e-10 && alpha(i) < C - 1e-10) {
            bias_sum += y[static_cast<std::size_t>(i)] - decision_wo_bias(i);
            ++free_count;
        }
    }
    double bias;
    if (free_count > 0) {
        bias = bias_sum / free_count;
    } else {
        bias = (m_up + m_low) / 2.0;
    }

    int n_sv = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (alpha(i) > 1e-12) ++n_sv;
    }
    result.model.support_vectors.resize(n_sv, X.cols());
    result.model.coeffs.resize(n_sv);
    int s = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (alpha(i) > 1e-12) {
            result.model.support_vectors.row(s) = X.row(i);
            result.model.coeffs(s) = alpha(i) * y[static_cast<std::size_t>(i)];
            ++s;
        }
    }
    result.model.bias = bias;
    return result;
}

/// One-vs-one multiclass SVM over the eight occupancy classes.
struct PairwiseModel {
    int class_a = 0; // positive label
    int class_b = 0; // negative label
    BinarySvmModel model;
};

struct SvmModel {
    KernelParams kernel;
    double c = 1.0;
    Eigen::Index feature_dim = 0;
    std::vector<PairwiseModel> pairs; // all 28 pairs, (a, b) with a < b
};

/// Trains all 28 pairwise classifiers. Every class must be present.
inline SvmModel train_multiclass(const Eigen::MatrixXd& X,
                                 const std::vector<OccupancyClass>& y, double C,
                                 const KernelParams& kernel) {
    const Eigen::Index n = X.rows();
    if (static_cast<Eigen::Index>(y.size()) != n) {
        throw ConfigError("feature/label count mismatch");
    }
    std::array<std::vector<Eigen::Index>, kNumClasses> by_class;
    for (Eigen::Index i = 0; i < n; ++i) {
        by_class[static_cast<std::size_t>(static_cast<int>(y[static_cast<std::size_t>(i)]))]
            .push_back(i);
    }
    for (int c = 0; c < kNumClasses; ++c) {
        if (by_class[static_cast<std::size_t>(c)].empty()) {
            throw ConfigError(std::string("class ") + class_name(class_from_code(c)) +
                              " has no training samples");
        }
    }

    SvmModel model;
    model.kernel = kernel;
    model.c = C;
    model.feature_dim = X.cols();
    for (int a = 0; a < kNumClasses; ++a) {
        for (int b = a + 1; b < kNumClasses; ++b) {
            const auto& ia = by_class[static_cast<std::size_t>(a)];
            const auto& ib = by_class[static_cast<std::size_t>(b)];
            Eigen::MatrixXd sub(static_cast<Eigen::Index>(ia.size() + ib.size()), X.cols());
            std::vector<int> labels;
            labels.reserve(ia.size() + ib.size());
            Eigen::Index r = 0;
            for (Eigen::Index idx : ia) {
                sub.row(r++) = X.row(idx);
                labels.push_back(1);
            }
            for (Eigen::Index idx : ib) {
                sub.row(r++) = X.row(idx);
                labels.push_back(-1);
            }
            PairwiseModel pm;
            pm.class_a = a;
            pm.class_b = b;
            pm.model = train_binary(sub, labels, C, kernel).model;
            model.pairs.push_back(std::move(pm));
        }
    }
    return model;
}

/// Majority vote over the 28 pairwise decisions. Vote ties go to the class
/// with the larger summed |decision value| over the pairs it won, then to
/// the lower class code.
inline OccupancyClass predict(const SvmModel& model, const Eigen::VectorXd& x) {
    if (x.size() != model.feature_dim) {
        throw ConfigError("predict dimension mismatch: got " + std::to_string(x.size()) +
                          ", expected " + std::to_string(model.feature_dim));
    }
    std::array<int, kNumClasses> votes{};
    std::array<double, kNumClasses> magnitude{};
    for (const PairwiseModel& pm : model.pairs) {
        const double f = decision_value(pm.model, model.kernel, x);
        const int winner = f >= 0.0 ? pm.class_a : pm.class_b;
        votes[static_cast<std::size_t>(winner)] += 1;
        magnitude[static_cast<std::size_t>(winner)] += std::abs(f);
    }
    int best = 0;
    for (int c = 1; c < kNumClasses; ++c) {
        const auto cu = static_cast<std::size_t>(c);
        const auto bu = static_cast<std::size_t>(best);
        if (votes[cu] > votes[bu] ||
            (votes[cu] == votes[bu] && magnitude[cu] > magnitude[bu])) {
            best = c;
        }
    }
    return class_from_code(best);
}

/// 8x8 confusion counts; rows = true class, columns = predicted class.
struct ConfusionMatrix {
    std::array<std::array<long, kNumClasses>, kNumClasses> counts{};

    long total() const {
        long t = 0;
        for (const auto& row : counts) {
            for (long v : row) t += v;
        }
        return t;
    }
    long trace() const {
        long t = 0;
        for (int c = 0; c < kNumClasses; ++c) {
            t += counts[static_cast<std::size_t>(c)][static_cast<std::size_t>(c)];
        }
        return t;
    }
    double accuracy() const {
        const long t = total();
        return t == 0 ? 0.0 : static_cast<double>(trace()) / static_cast<double>(t);
    }
    /// Accuracy after collapsing to NoOne vs occupied.
    double binary_accuracy() const {
        long correct = 0, t = 0;
        for (int a = 0; a < kNumClasses; ++a) {
            for (int b = 0; b < kNumClasses; ++b) {
                const long v = counts[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
                t += v;
                const bool true_occupied = a != 0;
                const bool pred_occupied = b != 0;
                if (true_occupied == pred_occupied) correct += v;
            }
        }
        return t == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(t);
    }

    std::string to_csv() const {
        std::ostringstream out;
        out << "true\\pred";
        for (OccupancyClass c : kAllClasses) out << "," << class_name(c);
        out << "\n";
        for (int a = 0; a < kNumClasses; ++a) {
            out << class_name(class_from_code(a));
            for (int b = 0; b < kNumClasses; ++b) {
                out << "," << counts[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
            }
            out << "\n";
        }
        return out.str();
    }

    std::string to_table() const {
        std::ostringstream out;
        out << "true\\pred";
        for (OccupancyClass c : kAllClasses) {
            out << " " << std::setw(7) << class_name(c);
        }
        out << "\n";
        for (int a = 0; a < kNumClasses; ++a) {
            out << std::setw(9) << class_name(class_from_code(a));
            for (int b = 0; b < kNumClasses; ++b) {
                out << " " << std::setw(7)
                    << counts[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
            }
            out << "\n";
        }
        return out.str();
    }
};

struct EvalResult {
    ConfusionMatrix confusion;
    double accuracy = 0.0;
    double binary_accuracy = 0.0;
};

inline EvalResult evaluate(const SvmModel& model, const Eigen::MatrixXd& X,
                           const std::vector<OccupancyClass>& y) {
    if (X.rows() == 0) throw ConfigError("evaluation set must not be empty");
    if (static_cast<Eigen::Index>(y.size()) != X.rows()) {
        throw ConfigError("feature/label count mismatch");
    }
    EvalResult result;
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        const OccupancyClass pred = predict(model, X.row(i).transpose());
        result.confusion.counts[static_cast<std::size_t>(
            static_cast<int>(y[static_cast<std::size_t>(i)]))]
                               [static_cast<std::size_t>(static_cast<int>(pred))] += 1;
    }
    result.accuracy = result.confusion.accuracy();
    result.binary_accuracy = result.confusion.binary_accuracy();
    return result;
}

/// Stratified k-fold assignment: per-class seeded shuffle, then round-robin
/// fold indices, so class proportions are preserved per fold and every
/// sample lands in exactly one validation fold.
inline std::vector<int> stratified_folds(const std::vector<OccupancyClass>& y, int k,
                                         std::uint64_t seed) {
    if (k < 2) throw ConfigError("k-fold cross validation needs k >= 2");
    std::array<std::vector<std::size_t>, kNumClasses> by_class;
    for (std::size_t i = 0; i < y.size(); ++i) {
        by_class[static_cast<std::size_t>(static_cast<int>(y[i]))].push_back(i);
    }
    std::vector<int> fold(y.size(), -1);
    detail::Rng rng(detail::mix_seed(seed, 0xF01DULL));
    for (int c = 0; c < kNumClasses; ++c) {
        auto& idx = by_class[static_cast<std::size_t>(c)];
        if (idx.empty()) continue;
        if (static_cast<int>(idx.size()) < k) {
            throw ConfigError(std::string("stratification infeasible: class ") +
                              class_name(class_from_code(c)) + " has " +
                              std::to_string(idx.size()) + " samples but k = " +
                              std::to_string(k));
        }
        // Fisher-Yates with the shared seeded stream
        for (std::size_t i = idx.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(rng.below(i));
            std::swap(idx[i - 1], idx[j]);
        }
        for (std::size_t i = 0; i < idx.size(); ++i) {
            fold[idx[i]] = static_cast<int>(i % static_cast<std::size_t>(k));
        }
    }
    return fold;
}

struct ParamGrid {
    std::vector<double> c_values;
    std::vector<double> gamma_values;
};

/// Default grid; gamma 1/D uses the post-reduction feature dimension.
inline ParamGrid default_param_grid(Eigen::Index feature_dim) {
    return {{0.1, 1.0, 10.0, 100.0},
            {1.0 / static_cast<double>(std::max<Eigen::Index>(feature_dim, 1)), 0.01,
             0.1, 1.0}};
}

struct GridSearchResult {
    double best_c = 0.0;
    double best_gamma = 0.0;
    double best_cv_accuracy = -1.0;
    // (C, gamma, mean validation accuracy) per grid point, in search order
    std::vector<std::tuple<double, double, double>> scores;
};

/// Grid search with stratified k-fold cross validation; the score of a grid
/// point is the mean validation accuracy over folds. Ties resolve to the
/// smaller C, then the smaller gamma (search order guarantees this).
inline GridSearchResult grid_search_cv(const Eigen::MatrixXd& X,
                                       const std::vector<OccupancyClass>& y,
                                       const ParamGrid& grid, int k,
                                       std::uint64_t seed,
                                       KernelKind kind = KernelKind::Rbf) {
    if (grid.c_values.empty() || grid.gamma_values.empty()) {
        throw ConfigError("parameter grid must not be empty");
    }
    const std::vector<int> fold = stratified_folds(y, k, seed);

    GridSearchResult result;
    std::vector<double> c_sorted = grid.c_values;
    std::vector<double> gamma_sorted = grid.gamma_values;
    std::sort(c_sorted.begin(), c_sorted.end());
    std::sort(gamma_sorted.begin(), gamma_sorted.end());

    for (double C : c_sorted) {
        for (double gamma : gamma_sorted) {
            KernelParams kernel{kind, gamma};
            double accuracy_sum = 0.0;
            for (int f = 0; f < k; ++f) {
                std::vector<Eigen::Index> train_idx, val_idx;
                for (std::size_t i = 0; i < y.size(); ++i) {
                    (fold[i] == f ? val_idx : train_idx)
                        .push_back(static_cast<Eigen::Index>(i));
                }
                Eigen::MatrixXd X_train(static_cast<Eigen::Index>(train_idx.size()),
                                        X.cols());
                std::vector<OccupancyClass> y_train(train_idx.size());
                for (std::size_t i = 0; i < train_idx.size(); ++i) {
                    X_train.row(static_cast<Eigen::Index>(i)) = X.row(train_idx[i]);
                    y_train[i] = y[static_cast<std::size_t>(train_idx[i])];
                }
                const SvmModel model = train_multiclass(X_train, y_train, C, kernel);
                long correct = 0;
                for (Eigen::Index idx : val_idx) {
                    if (predict(model, X.row(idx).transpose()) ==
                        y[static_cast<std::size_t>(idx)]) {
                        ++correct;
                    }
                }
                accuracy_sum += val_idx.empty()
                                    ? 0.0
                                    : static_cast<double>(correct) /
                                          static_cast<double>(val_idx.size());
            }
            const double mean_accuracy = accuracy_sum / static_cast<double>(k);
            result.scores.emplace_back(C, gamma, mean_accuracy);
            if (mean_accuracy > result.best_cv_accuracy) {
                result.best_cv_accuracy = mean_accuracy;
                result.best_c = C;
                result.best_gamma = gamma;
            }
        }
    }
    return result;
}

// JSON persistence.

inline void to_json(nlohmann::json& j, const BinarySvmModel& m) {
    j = nlohmann::json{{"support_vectors", detail::matrix_to_json(m.support_vectors)},
                       {"coeffs", detail::vector_to_json(m.coeffs)},
                       {"bias", m.bias}};
}

inline void from_json(const nlohmann::json& j, BinarySvmModel& m) {
    m.support_vectors = detail::matrix_from_json(j.at("support_vectors"));
    m.coeffs = detail::vector_from_json(j.at("coeffs"));
    j.at("bias").get_to(m.bias);
}

inline void to_json(nlohmann::json& j, const SvmModel& m) {
    nlohmann::json pairs = nlohmann::json::array();
    for (const PairwiseModel& pm : m.pairs) {
        pairs.push_back(nlohmann::json{{"class_a", pm.class_a},
                                       {"class_b", pm.class_b},
                                       {"model", pm.model}});
    }
    j = nlohmann::json{
        {"kernel", m.kernel.kind == KernelKind::Rbf ? "rbf" : "linear"},
        {"gamma", m.kernel.gamma},
        {"C", m.c},
        {"feature_dim", m.feature_dim},
        {"pairs", pairs}};
}

inline void from_json(const nlohmann::json& j, SvmModel& m) {
    const std::string kind = j.at("kernel").get<std::string>();
    if (kind == "rbf") {
        m.kernel.kind = KernelKind::Rbf;
    } else if (kind == "linear") {
        m.kernel.kind = KernelKind::Linear;
    } else {
        throw ConfigError("unknown kernel kind: " + kind);
    }
    j.at("gamma").get_to(m.kernel.gamma);
    j.at("C").get_to(m.c);
    long dim = 0;
    j.at("feature_dim").get_to(dim);
    m.feature_dim = static_cast<Eigen::Index>(dim);
    m.pairs.clear();
    for (const nlohmann::json& pj : j.at("pairs")) {
        PairwiseModel pm;
        pj.at("class_a").get_to(pm.class_a);
        pj.at("class_b").get_to(pm.class_b);
        pj.at("model").get_to(pm.model);
        m.pairs.push_back(std::move(pm));
    }
}

} // namespace ovd
