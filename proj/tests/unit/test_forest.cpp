#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "threatbench/core/error.hpp"
#include "threatbench/forest/boosting.hpp"
#include "threatbench/forest/isolation.hpp"
#include "threatbench/forest/random_forest.hpp"

namespace tb = threatbench;
namespace forest = threatbench::forest;

namespace {

tb::Matrix random_matrix(std::size_t rows, std::size_t cols, tb::RngStream rng, double round_to = 0) {
    tb::Matrix X(rows, cols);
    for (double& v : X.data()) {
        v = rng.normal();
        if (round_to > 0) v = std::round(v / round_to) * round_to;
    }
    return X;
}

std::vector<int> noisy_labels(const tb::Matrix& X, tb::RngStream rng) {
    std::vector<int> y(X.rows());
    for (std::size_t i = 0; i < X.rows(); ++i) {
        const double z = X(i, 0) - 0.7 * X(i, 1) + 0.5 * rng.normal();
        y[i] = z > 0 ? 1 : 0;
    }
    return y;
}

double gini(double w0, double w1) {
    const double t = w0 + w1;
    if (t == 0) return 0;
    const double p = w1 / t;
    return 2 * p * (1 - p);
}

// Weighted child impurity of the best split found by trying every feature and
// every midpoint between consecutive distinct values.
double best_split_impurity(const tb::Matrix& X, const std::vector<int>& y) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t f = 0; f < X.cols(); ++f) {
        auto values = X.column(f);
        std::sort(values.begin(), values.end());
        values.erase(std::unique(values.begin(), values.end()), values.end());
        for (std::size_t k = 0; k + 1 < values.size(); ++k) {
            const double thr = 0.5 * (values[k] + values[k + 1]);
            double l0 = 0, l1 = 0, r0 = 0, r1 = 0;
            for (std::size_t i = 0; i < X.rows(); ++i) {
                if (X(i, f) <= thr) (y[i] ? l1 : l0) += 1;
                else (y[i] ? r1 : r0) += 1;
            }
            best = std::min(best, ((l0 + l1) * gini(l0, l1) + (r0 + r1) * gini(r0, r1)) / X.rows());
        }
    }
    return best;
}

double split_impurity(const tb::Matrix& X, const std::vector<int>& y, int f, double thr) {
    double l0 = 0, l1 = 0, r0 = 0, r1 = 0;
    for (std::size_t i = 0; i < X.rows(); ++i) {
        if (X(i, static_cast<std::size_t>(f)) <= thr) (y[i] ? l1 : l0) += 1;
        else (y[i] ? r1 : r0) += 1;
    }
    return ((l0 + l1) * gini(l0, l1) + (r0 + r1) * gini(r0, r1)) / X.rows();
}

void check_tree_shape(const forest::Tree& tree, std::size_t d) {
    for (const auto& node : tree.nodes) {
        if (node.is_leaf()) continue;
        CHECK(static_cast<std::size_t>(node.feature) < d);
        CHECK(node.left > 0);
        CHECK(node.right > 0);
        CHECK(static_cast<std::size_t>(node.left) < tree.nodes.size());
        CHECK(static_cast<std::size_t>(node.right) < tree.nodes.size());
    }
}

forest::BoostingConfig single_round(int depth, double lambda) {
    forest::BoostingConfig c;
    c.max_rounds = 1;
    c.max_depth = depth;
    c.lambda = lambda;
    c.subsample = 1.0;
    c.min_child_weight = 0.0;
    c.early_stopping_rounds = 5;
    return c;
}

} // namespace

TEST_CASE("gini tree: root split attains the exhaustive minimum") {
    tb::RngStream gen(1, "gini-oracle");
    for (int trial = 0; trial < 60; ++trial) {
        const std::size_t n = 8 + gen.uniform_int(std::uint64_t{57});
        const std::size_t d = 1 + gen.uniform_int(std::uint64_t{4});
        const auto X = random_matrix(n, d, gen.child("x", trial), trial % 2 ? 0.5 : 0.0);
        auto y = noisy_labels(d > 1 ? X : random_matrix(n, 2, gen.child("x", trial)),
                              gen.child("y", trial));
        y[0] = 0;
        y[1] = 1;
        const std::vector<double> w(n, 1.0);
        const auto tree = forest::fit_gini_tree(X, y, w, 1, 2, static_cast<int>(d),
                                                tb::RngStream(2, "t"));
        const double best = best_split_impurity(X, y);
        if (!std::isfinite(best)) continue;
        REQUIRE_FALSE(tree.nodes[0].is_leaf());
        const auto& root = tree.nodes[0];
        CHECK(split_impurity(X, y, root.feature, root.threshold) == doctest::Approx(best).epsilon(1e-12));
    }
}

TEST_CASE("gini tree: thresholds are midpoints and ties go to the lower feature") {
    tb::Matrix X(4, 2);
    const double xs[] = {1, 2, 4, 8};
    for (std::size_t i = 0; i < 4; ++i) X(i, 0) = X(i, 1) = xs[i];
    const std::vector<int> y{0, 0, 1, 1};
    const std::vector<double> w(4, 1.0);
    const auto tree = forest::fit_gini_tree(X, y, w, 3, 2, 2, tb::RngStream(1, "t"));
    CHECK(tree.nodes[0].feature == 0);
    CHECK(tree.nodes[0].threshold == 3.0);
    CHECK(tree.depth() == 1);
    check_tree_shape(tree, 2);
}

TEST_CASE("random forest: separable one-dimensional data") {
    tb::Matrix X(200, 1);
    std::vector<int> y(200);
    tb::RngStream rng(5, "sep");
    for (std::size_t i = 0; i < 200; ++i) {
        X(i, 0) = rng.uniform(-1, 1);
        y[i] = X(i, 0) > 0;
    }
    forest::ForestConfig cfg;
    cfg.n_trees = 25;
    const auto model = forest::fit_random_forest(X, y, cfg, tb::RngStream(1, "rf"));
    const auto p = model.predict_proba(X);
    for (std::size_t i = 0; i < 200; ++i) CHECK((p[i] > 0.5) == (y[i] == 1));
    for (const auto& t : model.trees) check_tree_shape(t, 1);
}

TEST_CASE("random forest: determinism, schedule independence and json") {
    const auto X = random_matrix(400, 6, tb::RngStream(3, "x"));
    const auto y = noisy_labels(X, tb::RngStream(3, "y"));
    forest::ForestConfig cfg;
    cfg.n_trees = 20;
    const auto serial = forest::fit_random_forest(X, y, cfg, tb::RngStream(9, "rf"), tb::Exec::serial);
    const auto parallel = forest::fit_random_forest(X, y, cfg, tb::RngStream(9, "rf"), tb::Exec::parallel);
    CHECK(serial == parallel);
    CHECK(serial.features_per_split == 3);
    CHECK(serial.predict_proba(X, tb::Exec::serial) == parallel.predict_proba(X, tb::Exec::parallel));

    const auto other = forest::fit_random_forest(X, y, cfg, tb::RngStream(10, "rf"));
    CHECK_FALSE(other == serial);

    const auto back = forest::RandomForestModel::from_json(
        nlohmann::json::parse(serial.to_json().dump()));
    CHECK(back == serial);
    CHECK(back.predict_proba(X) == serial.predict_proba(X));
}

TEST_CASE("random forest: probabilities and errors") {
    const auto X = random_matrix(300, 4, tb::RngStream(4, "x"));
    const auto y = noisy_labels(X, tb::RngStream(4, "y"));
    forest::ForestConfig cfg;
    cfg.n_trees = 10;
    const auto model = forest::fit_random_forest(X, y, cfg, tb::RngStream(1, "rf"));
    const auto probe = random_matrix(1000, 4, tb::RngStream(5, "probe"));
    for (double p : model.predict_proba(probe)) {
        CHECK(p >= 0.0);
        CHECK(p <= 1.0);
    }
    const std::vector<double> narrow(3, 0.0);
    CHECK_THROWS_AS((void)model.predict_one(narrow), tb::DataError);

    const std::vector<int> same(300, 1);
    CHECK_THROWS_AS(forest::fit_random_forest(X, same, cfg, tb::RngStream(1, "rf")), tb::DataError);

    forest::RandomForestModel unanimous;
    unanimous.n_features = 1;
    forest::Tree leaf;
    leaf.nodes.push_back({});
    leaf.nodes[0].value = 1.0;
    unanimous.trees.assign(5, leaf);
    const std::vector<double> x{0.3};
    CHECK(unanimous.predict_one(x) == 1.0);
}

TEST_CASE("boosting: symmetric gradients leave the margin unchanged") {
    tb::Matrix X(4, 1);
    for (std::size_t i = 0; i < 4; ++i) X(i, 0) = static_cast<double>(i);
    const std::vector<int> y{1, 1, 0, 0};
    const auto model = forest::fit_gradient_boosting(X, y, single_round(0, 0.0), X, y,
                                                     tb::RngStream(1, "gb"));
    CHECK(model.base_score == 0.0);
    for (std::size_t i = 0; i < 4; ++i) CHECK(model.margin(X.row(i)) == 0.0);
    if (!model.trees.empty()) CHECK(model.trees[0].nodes[0].value == 0.0);
}

TEST_CASE("boosting: leaf weights match the closed form") {
    tb::Matrix X(6, 1);
    const std::vector<int> y{0, 0, 0, 1, 1, 0};
    const double xs[] = {0, 1, 2, 3, 4, 5};
    for (std::size_t i = 0; i < 6; ++i) X(i, 0) = xs[i];
    const std::vector<int> yv{0, 0, 1, 1};
    tb::Matrix Xv(4, 1);
    const double xv[] = {0.5, 1.5, 3.2, 3.7};
    for (std::size_t i = 0; i < 4; ++i) Xv(i, 0) = xv[i];

    const auto model = forest::fit_gradient_boosting(X, y, single_round(1, 1.0), Xv, yv,
                                                     tb::RngStream(1, "gb"));
    REQUIRE(model.trees.size() == 1);
    const auto& tree = model.trees[0];
    REQUIRE_FALSE(tree.nodes[0].is_leaf());
    const double p = forest::sigmoid(model.base_score);
    CHECK(model.base_score == doctest::Approx(std::log(2.0 / 4.0)).epsilon(1e-14));

    const double thr = tree.nodes[0].threshold;
    double GL = 0, HL = 0, GR = 0, HR = 0;
    for (std::size_t i = 0; i < 6; ++i) {
        const double g = p - y[i];
        const double h = p * (1 - p);
        if (X(i, 0) <= thr) { GL += g; HL += h; }
        else { GR += g; HR += h; }
    }
    CHECK(std::abs(tree.nodes[static_cast<std::size_t>(tree.nodes[0].left)].value - (-GL / (HL + 1.0))) <= 1e-12);
    CHECK(std::abs(tree.nodes[static_cast<std::size_t>(tree.nodes[0].right)].value - (-GR / (HR + 1.0))) <= 1e-12);
    CHECK(thr == 2.5);
}

TEST_CASE("boosting: training loss never increases without subsampling") {
    const auto X = random_matrix(500, 5, tb::RngStream(6, "x"));
    const auto y = noisy_labels(X, tb::RngStream(6, "y"));
    forest::BoostingConfig cfg;
    cfg.subsample = 1.0;
    cfg.gamma = 0.0;
    cfg.max_rounds = 40;
    cfg.early_stopping_rounds = 1000;
    const auto model = forest::fit_gradient_boosting(X, y, cfg, X, y, tb::RngStream(1, "gb"));
    REQUIRE(model.train_loss.size() == 41);
    for (std::size_t t = 1; t < model.train_loss.size(); ++t) {
        CHECK(model.train_loss[t] <= model.train_loss[t - 1] + 1e-15);
    }
}

TEST_CASE("early stopping keeps the best round") {
    forest::EarlyStopping stop(2);
    const double losses[] = {1.0, 0.9, 0.8, 0.7, 0.75, 0.8, 0.9};
    int stopped_at = -1;
    for (int r = 0; r < 7; ++r) {
        if (stop.update(r, losses[r])) {
            stopped_at = r;
            break;
        }
    }
    CHECK(stop.best_round() == 3);
    CHECK(stopped_at == 5);
}

TEST_CASE("boosting: early stopping truncates to the best iteration") {
    const auto X = random_matrix(300, 4, tb::RngStream(7, "x"));
    const auto y = noisy_labels(X, tb::RngStream(7, "y"));
    const auto Xv = random_matrix(200, 4, tb::RngStream(8, "x"));
    auto yv = noisy_labels(Xv, tb::RngStream(8, "y"));
    for (auto& v : yv) v = 1 - v; // anti-correlated validation: loss rises from round 1
    forest::BoostingConfig cfg;
    cfg.early_stopping_rounds = 3;
    const auto model = forest::fit_gradient_boosting(X, y, cfg, Xv, yv, tb::RngStream(1, "gb"));
    CHECK(model.best_iteration == 0);
    CHECK(model.trees.empty());
    CHECK(model.valid_loss.size() == 4);
    const auto p = model.predict_proba(X);
    for (double v : p) CHECK(v == forest::sigmoid(model.base_score));
}

TEST_CASE("boosting: probabilities, json and errors") {
    const auto X = random_matrix(400, 5, tb::RngStream(9, "x"));
    const auto y = noisy_labels(X, tb::RngStream(9, "y"));
    forest::BoostingConfig cfg;
    cfg.max_rounds = 30;
    const auto model = forest::fit_gradient_boosting(X, y, cfg, X, y, tb::RngStream(1, "gb"));
    const auto probe = random_matrix(1000, 5, tb::RngStream(10, "probe"));
    const auto p = model.predict_proba(probe);
    for (double v : p) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
    const auto margins = model.predict_margin(probe);
    for (std::size_t i = 0; i < 1000; ++i) {
        double m = model.base_score;
        for (int t = 0; t < model.best_iteration; ++t) {
            m += cfg.learning_rate * model.trees[static_cast<std::size_t>(t)].predict(probe.row(i));
        }
        CHECK(margins[i] == doctest::Approx(m).epsilon(1e-12));
    }
    const auto back = forest::GradientBoostingModel::from_json(nlohmann::json::parse(model.to_json().dump()));
    CHECK(back == model);
    CHECK(back.predict_proba(probe) == p);
    CHECK(model == forest::fit_gradient_boosting(X, y, cfg, X, y, tb::RngStream(1, "gb")));

    const std::vector<int> one_class(400, 0);
    CHECK_THROWS_AS(forest::fit_gradient_boosting(X, one_class, cfg, X, y, tb::RngStream(1, "gb")),
                    tb::DataError);
    CHECK_THROWS_AS(forest::fit_gradient_boosting(X, y, cfg, X, one_class, tb::RngStream(1, "gb")),
                    tb::DataError);
    CHECK_THROWS(forest::fit_gradient_boosting(X, y, cfg, tb::Matrix(0, 5), {}, tb::RngStream(1, "gb")));
    const std::vector<double> narrow(4, 0.0);
    CHECK_THROWS_AS((void)model.margin(narrow), tb::DataError);
}

TEST_CASE("isolation: c function") {
    CHECK(forest::average_path_length(2) == 1.0);
    CHECK(forest::average_path_length(1) == 0.0);
    double h = 0;
    for (int i = 1; i <= 255; ++i) h += 1.0 / i;
    const double c256 = 2 * h - 2.0 * 255 / 256;
    CHECK(forest::average_path_length(256) == doctest::Approx(c256).epsilon(1e-14));
    CHECK(c256 == doctest::Approx(10.2487).epsilon(1e-5));
    for (std::size_t m = 2; m < 5000; ++m) {
        REQUIRE(forest::average_path_length(m + 1) > forest::average_path_length(m));
    }
    CHECK(forest::isolation_score(forest::average_path_length(256), 256) == 0.5);
}

TEST_CASE("isolation forest: scores, determinism and schedule independence") {
    const auto X = random_matrix(1000, 3, tb::RngStream(11, "x"));
    const auto a = forest::fit_isolation_forest(X, 50, 128, tb::RngStream(1, "if"), tb::Exec::serial);
    const auto b = forest::fit_isolation_forest(X, 50, 128, tb::RngStream(1, "if"), tb::Exec::parallel);
    CHECK(a == b);
    CHECK(a.height_limit == 7);
    const auto s = a.score(X, tb::Exec::serial);
    CHECK(s == a.score(X, tb::Exec::parallel));
    for (double v : s) {
        CHECK(v > 0.0);
        CHECK(v < 1.0);
    }
    for (const auto& t : a.trees) {
        CHECK(t.depth() <= 7);
        check_tree_shape(t, 3);
    }
    const auto back = forest::IsolationForestModel::from_json(nlohmann::json::parse(a.to_json().dump()));
    CHECK(back == a);
    CHECK(back.score(X) == s);

    CHECK_THROWS_AS(forest::fit_isolation_forest(X, 10, 2000, tb::RngStream(1, "if")), tb::Error);
    CHECK_THROWS_AS(forest::fit_isolation_forest(X, 10, 1, tb::RngStream(1, "if")), tb::Error);
}

TEST_CASE("isolation forest: planted outlier scores highest") {
    int wins = 0;
    for (int trial = 0; trial < 20; ++trial) {
        auto X = random_matrix(500, 2, tb::RngStream(static_cast<std::uint64_t>(trial), "cluster"));
        const std::vector<double> outlier{10.0, 10.0};
        X.append_row(outlier);
        const auto model = forest::fit_isolation_forest(
            X, 100, 256, tb::RngStream(static_cast<std::uint64_t>(trial), "if"));
        const auto s = model.score(X);
        wins += std::max_element(s.begin(), s.end()) - s.begin() == 500;
    }
    CHECK(wins >= 19);
}

TEST_CASE("tree json keeps null for an empty tree") {
    forest::Tree empty;
    CHECK(forest::tree_to_json(empty).is_null());
    CHECK(forest::tree_from_json(nlohmann::json()) == empty);
}
