#include "gridsentry/classifiers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gridsentry/models/boosting.hpp"
#include "gridsentry/models/forest.hpp"
#include "gridsentry/models/knn.hpp"
#include "gridsentry/models/linear.hpp"
#include "gridsentry/models/mlp.hpp"
#include "gridsentry/models/naive_bayes.hpp"

namespace gridsentry {

std::vector<int> ProbabilisticClassifier::predict(const Matrix& x) const {
    const Matrix proba = predict_proba(x);
    std::vector<int> out(proba.rows());
    for (std::size_t r = 0; r < proba.rows(); ++r) {
        const auto row = proba.row(r);
        std::size_t best = 0;
        for (std::size_t c = 1; c < row.size(); ++c)
            if (row[c] > row[best]) best = c;  // ties keep the lowest class
        out[r] = static_cast<int>(best);
    }
    return out;
}

void ProbabilisticClassifier::check_fit_inputs(const Matrix& x, const std::vector<int>& y,
                                               int num_classes,
                                               const std::vector<double>& sample_weights) {
    if (x.rows() == 0 || x.cols() == 0) throw ValidationError(kind() + ": empty training matrix");
    if (y.size() != x.rows())
        throw ValidationError(kind() + ": label count does not match sample count");
    if (num_classes < 1) throw ValidationError(kind() + ": num_classes must be >= 1");
    for (int label : y)
        if (label < 0 || label >= num_classes)
            throw ValidationError(kind() + ": encoded label " + std::to_string(label) +
                                  " outside [0, " + std::to_string(num_classes) + ")");
    if (!sample_weights.empty()) {
        if (sample_weights.size() != x.rows())
            throw ValidationError(kind() + ": sample weight count does not match sample count");
        double total = 0.0;
        for (double w : sample_weights) {
            if (!(w >= 0.0) || !std::isfinite(w))
                throw ValidationError(kind() + ": sample weights must be finite and >= 0");
            total += w;
        }
        if (!(total > 0.0)) throw ValidationError(kind() + ": sample weights sum to zero");
    }
    num_classes_ = num_classes;
    feature_width_ = x.cols();
}

void ProbabilisticClassifier::check_predict_input(const Matrix& x) const {
    if (num_classes_ == 0) throw ContractError(kind() + ": predict before fit");
    if (x.cols() != feature_width_)
        throw ContractError(kind() + ": feature width " + std::to_string(x.cols()) +
                            " does not match fitted width " + std::to_string(feature_width_));
}

const std::vector<std::string>& model_kinds() {
    static const std::vector<std::string> kinds{
        "decision_tree", "random_forest",       "extra_trees", "adaboost",
        "gradient_boosting", "knn",             "gaussian_nb", "logistic_regression",
        "mlp_2h",        "mlp_3h",              "mlp_wide"};
    return kinds;
}

namespace {

bool supports_class_weights(const std::string& kind) {
    return kind != "knn" && kind != "gaussian_nb";
}

// resolve spec.params against the kind's defaults; unknown keys are rejected
std::map<std::string, double> resolve_params(const ModelSpec& spec) {
    auto params = default_params(spec.kind);  // throws on unknown kind
    for (const auto& [key, value] : spec.params) {
        auto it = params.find(key);
        if (it == params.end())
            throw ValidationError(spec.kind + ": unknown hyperparameter '" + key + "'");
        if (!std::isfinite(value))
            throw ValidationError(spec.kind + ": hyperparameter '" + key + "' must be finite");
        it->second = value;
    }
    return params;
}

int as_int(const std::map<std::string, double>& params, const std::string& key,
           const std::string& kind) {
    const double v = params.at(key);
    if (std::abs(v - std::round(v)) > 1e-9)
        throw ValidationError(kind + ": hyperparameter '" + key + "' must be an integer");
    return static_cast<int>(std::llround(v));
}

std::vector<int> hidden_layers_for(const std::string& kind) {
    if (kind == "mlp_2h") return {64, 64};
    if (kind == "mlp_3h") return {64, 64, 64};
    return {256, 256, 256};  // mlp_wide
}

}  // namespace

std::map<std::string, double> default_params(const std::string& kind) {
    if (kind == "decision_tree") return {{"max_depth", 0}, {"min_samples_leaf", 1}};
    if (kind == "random_forest" || kind == "extra_trees")
        return {{"n_trees", 100}, {"max_depth", 0}, {"min_samples_leaf", 1}, {"max_features", 0}};
    if (kind == "adaboost") return {{"n_rounds", 100}};
    if (kind == "gradient_boosting")
        return {{"n_rounds", 100}, {"learning_rate", 0.1}, {"max_depth", 3},
                {"min_samples_leaf", 1}};
    if (kind == "knn") return {{"k", 5}};
    if (kind == "gaussian_nb") return {{"var_smoothing", 1e-9}};
    if (kind == "logistic_regression")
        return {{"learning_rate", 0.1}, {"iterations", 300}, {"l2", 1e-4}};
    if (kind == "mlp_2h" || kind == "mlp_3h" || kind == "mlp_wide")
        return {{"epochs", 200}, {"batch_size", 256}, {"learning_rate", 1e-3},
                {"momentum", 0.9}, {"l2", 1e-4}};
    throw ValidationError("unknown model kind '" + kind + "'");
}

std::vector<ModelSpec> default_model_specs(std::uint64_t seed) {
    std::vector<ModelSpec> specs;
    for (const auto& kind : model_kinds()) {
        ModelSpec spec;
        spec.kind = kind;
        spec.seed = seed;
        // Nets train on the natural class priors by convention; reweighting
        // stays available through ModelSpec for anyone who wants it.
        spec.balanced_class_weights =
            supports_class_weights(kind) && kind.rfind("mlp", 0) != 0;
        specs.push_back(std::move(spec));
    }
    return specs;
}

std::unique_ptr<ProbabilisticClassifier> make_model(const ModelSpec& spec) {
    const auto params = resolve_params(spec);
    const auto& kind = spec.kind;
    if (kind == "decision_tree")
        return std::make_unique<DecisionTree>(as_int(params, "max_depth", kind),
                                              as_int(params, "min_samples_leaf", kind),
                                              spec.seed);
    if (kind == "random_forest" || kind == "extra_trees")
        return std::make_unique<TreeEnsemble>(kind, as_int(params, "n_trees", kind),
                                              as_int(params, "max_depth", kind),
                                              as_int(params, "min_samples_leaf", kind),
                                              as_int(params, "max_features", kind), spec.seed);
    if (kind == "adaboost")
        return std::make_unique<AdaBoost>(as_int(params, "n_rounds", kind), spec.seed);
    if (kind == "gradient_boosting")
        return std::make_unique<GradientBoosting>(
            as_int(params, "n_rounds", kind), params.at("learning_rate"),
            as_int(params, "max_depth", kind), as_int(params, "min_samples_leaf", kind));
    if (kind == "knn") return std::make_unique<Knn>(as_int(params, "k", kind));
    if (kind == "gaussian_nb") return std::make_unique<GaussianNb>(params.at("var_smoothing"));
    if (kind == "logistic_regression")
        return std::make_unique<LogisticRegression>(params.at("learning_rate"),
                                                    as_int(params, "iterations", kind),
                                                    params.at("l2"));
    MlpConfig config;
    config.hidden_layers = hidden_layers_for(kind);
    config.epochs = as_int(params, "epochs", kind);
    config.batch_size = as_int(params, "batch_size", kind);
    config.learning_rate = params.at("learning_rate");
    config.momentum = params.at("momentum");
    config.l2 = params.at("l2");
    return std::make_unique<Mlp>(kind, std::move(config), spec.seed);
}

std::unique_ptr<ProbabilisticClassifier> fit_model(const ModelSpec& spec, const Matrix& x,
                                                   const std::vector<int>& y, int num_classes,
                                                   std::vector<std::string>* warnings) {
    auto model = make_model(spec);
    std::vector<double> sample_weights;
    if (spec.balanced_class_weights) {
        if (supports_class_weights(spec.kind)) {
            const auto class_w = balanced_class_weights(y, num_classes);
            sample_weights.resize(y.size());
            for (std::size_t i = 0; i < y.size(); ++i)
                sample_weights[i] = class_w[static_cast<std::size_t>(y[i])];
        } else if (warnings) {
            warnings->push_back(spec.kind + " does not support class weights; ignoring them");
        }
    }
    model->fit(x, y, num_classes, sample_weights);
    return model;
}

nlohmann::json save_model(const ProbabilisticClassifier& model, const ModelSpec& spec,
                          const LabelEncoder& encoder, const Scaler& scaler,
                          const std::vector<std::string>& feature_names) {
    return nlohmann::json{{"format_version", kArtifactFormatVersion},
                          {"kind", spec.kind},
                          {"seed", spec.seed},
                          {"balanced_class_weights", spec.balanced_class_weights},
                          {"params", spec.params},
                          {"encoder", encoder.classes()},
                          {"feature_names", feature_names},
                          {"scaler",
                           {{"mu", scaler.mu},
                            {"sigma", scaler.sigma},
                            {"constant_columns", scaler.constant_columns}}},
                          {"state", model.save_state()}};
}

LoadedModel load_model(const nlohmann::json& artifact) {
    if (!artifact.is_object() || !artifact.contains("format_version"))
        throw ValidationError("model artifact: missing format_version");
    const int version = artifact.at("format_version").get<int>();
    if (version != kArtifactFormatVersion)
        throw ValidationError("model artifact: format_version " + std::to_string(version) +
                              " is not supported (expected " +
                              std::to_string(kArtifactFormatVersion) + ")");
    LoadedModel loaded;
    loaded.spec.kind = artifact.at("kind").get<std::string>();
    loaded.spec.seed = artifact.at("seed").get<std::uint64_t>();
    loaded.spec.balanced_class_weights = artifact.at("balanced_class_weights").get<bool>();
    loaded.spec.params = artifact.at("params").get<std::map<std::string, double>>();
    loaded.encoder = LabelEncoder::fit(artifact.at("encoder").get<std::vector<int>>());
    loaded.feature_names = artifact.at("feature_names").get<std::vector<std::string>>();
    const auto& scaler = artifact.at("scaler");
    loaded.scaler.mu = scaler.at("mu").get<std::vector<double>>();
    loaded.scaler.sigma = scaler.at("sigma").get<std::vector<double>>();
    loaded.scaler.constant_columns =
        scaler.at("constant_columns").get<std::vector<std::size_t>>();
    if (loaded.scaler.mu.size() != loaded.scaler.sigma.size())
        throw ValidationError("model artifact: malformed scaler");
    loaded.model = make_model(loaded.spec);
    loaded.model->load_state(artifact.at("state"));
    return loaded;
}

OfflineMetrics evaluate_offline(const ProbabilisticClassifier& model, const Matrix& x,
                                const std::vector<int>& y, int num_classes) {
    if (x.rows() != y.size() || x.rows() == 0)
        throw ValidationError("evaluate_offline: empty or mismatched inputs");
    const auto pred = model.predict(x);
    const auto k = static_cast<std::size_t>(num_classes);
    std::vector<std::size_t> confusion(k * k, 0);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const auto truth = static_cast<std::size_t>(y[i]);
        const auto guess = static_cast<std::size_t>(pred[i]);
        if (truth >= k || guess >= k)
            throw ValidationError("evaluate_offline: label outside [0, K)");
        ++confusion[truth * k + guess];
        if (truth == guess) ++correct;
    }

    OfflineMetrics m;
    m.support = y.size();
    m.accuracy = static_cast<double>(correct) / static_cast<double>(y.size());
    for (std::size_t c = 0; c < k; ++c) {
        std::size_t row_total = 0, col_total = 0;
        for (std::size_t j = 0; j < k; ++j) {
            row_total += confusion[c * k + j];
            col_total += confusion[j * k + c];
        }
        if (row_total == 0) continue;  // class absent from the truth: zero support
        const auto diag = static_cast<double>(confusion[c * k + c]);
        const double precision = col_total > 0 ? diag / static_cast<double>(col_total) : 0.0;
        const double recall = diag / static_cast<double>(row_total);
        const double f1 =
            precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
        const double share = static_cast<double>(row_total) / static_cast<double>(y.size());
        m.precision += share * precision;
        m.recall += share * recall;
        m.f1 += share * f1;
    }
    return m;
}

GridSearchResult grid_search(const ModelSpec& base,
                             const std::vector<std::map<std::string, double>>& grid,
                             const Matrix& x, const std::vector<int>& y, int num_classes,
                             int folds, std::uint64_t seed,
                             std::vector<std::string>* warnings) {
    if (grid.empty()) throw ValidationError("grid search: empty hyperparameter grid");
    if (folds < 2) throw ValidationError("grid search: folds must be >= 2");
    if (x.rows() != y.size() || x.rows() == 0)
        throw ValidationError("grid search: empty or mismatched inputs");

    // stratified fold assignment: shuffle each class, deal round-robin
    std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(num_classes));
    for (std::size_t i = 0; i < y.size(); ++i)
        by_class[static_cast<std::size_t>(y[i])].push_back(i);
    std::vector<int> fold_of(y.size(), -1);
    const Rng master(seed);
    for (std::size_t c = 0; c < by_class.size(); ++c) {
        auto& rows = by_class[c];
        if (rows.empty()) continue;
        if (rows.size() < static_cast<std::size_t>(folds))
            throw ValidationError("grid search: class " + std::to_string(c) + " has " +
                                  std::to_string(rows.size()) + " samples, fewer than " +
                                  std::to_string(folds) + " folds");
        Rng rng = master.fork(c);
        rng.shuffle(rows);
        for (std::size_t i = 0; i < rows.size(); ++i)
            fold_of[rows[i]] = static_cast<int>(i % static_cast<std::size_t>(folds));
    }

    GridSearchResult result;
    result.best = base;
    double best_mean = -1.0;
    for (const auto& overrides : grid) {
        ModelSpec candidate = base;
        for (const auto& [key, value] : overrides) candidate.params[key] = value;

        GridSearchResult::Row row;
        row.overrides = overrides;
        for (int f = 0; f < folds; ++f) {
            std::vector<std::size_t> train_rows, eval_rows;
            for (std::size_t i = 0; i < y.size(); ++i)
                (fold_of[i] == f ? eval_rows : train_rows).push_back(i);
            Matrix train_x(train_rows.size(), x.cols());
            std::vector<int> train_y(train_rows.size());
            for (std::size_t i = 0; i < train_rows.size(); ++i) {
                const auto src = x.row(train_rows[i]);
                std::copy(src.begin(), src.end(), train_x.row(i).begin());
                train_y[i] = y[train_rows[i]];
            }
            Matrix eval_x(eval_rows.size(), x.cols());
            for (std::size_t i = 0; i < eval_rows.size(); ++i) {
                const auto src = x.row(eval_rows[i]);
                std::copy(src.begin(), src.end(), eval_x.row(i).begin());
            }
            auto model = fit_model(candidate, train_x, train_y, num_classes, nullptr);
            const auto pred = model->predict(eval_x);
            std::size_t correct = 0;
            for (std::size_t i = 0; i < eval_rows.size(); ++i)
                if (pred[i] == y[eval_rows[i]]) ++correct;
            row.fold_accuracy.push_back(static_cast<double>(correct) /
                                        static_cast<double>(eval_rows.size()));
        }
        row.mean_accuracy =
            std::accumulate(row.fold_accuracy.begin(), row.fold_accuracy.end(), 0.0) /
            static_cast<double>(folds);
        if (row.mean_accuracy > best_mean) {  // strict: ties keep the earlier entry
            best_mean = row.mean_accuracy;
            ModelSpec winner = base;
            for (const auto& [key, value] : overrides) winner.params[key] = value;
            result.best = winner;
        }
        result.table.push_back(std::move(row));
    }
    if (warnings && !supports_class_weights(base.kind) && base.balanced_class_weights)
        warnings->push_back(base.kind + " does not support class weights; ignoring them");
    return result;
}

std::vector<std::map<std::string, double>> default_tuning_grid(const std::string& kind) {
    if (kind == "decision_tree")
        return {{{"max_depth", 0}}, {{"max_depth", 8}}, {{"max_depth", 16}}};
    if (kind == "random_forest" || kind == "extra_trees")
        return {{{"n_trees", 50}}, {{"n_trees", 100}}, {{"n_trees", 200}}};
    if (kind == "adaboost") return {{{"n_rounds", 50}}, {{"n_rounds", 100}}, {{"n_rounds", 200}}};
    if (kind == "gradient_boosting")
        return {{{"learning_rate", 0.05}, {"n_rounds", 50}},
                {{"learning_rate", 0.05}, {"n_rounds", 100}},
                {{"learning_rate", 0.1}, {"n_rounds", 50}},
                {{"learning_rate", 0.1}, {"n_rounds", 100}}};
    if (kind == "knn") return {{{"k", 1}}, {{"k", 3}}, {{"k", 5}}, {{"k", 7}}};
    if (kind == "gaussian_nb")
        return {{{"var_smoothing", 1e-9}}, {{"var_smoothing", 1e-8}}, {{"var_smoothing", 1e-7}}};
    if (kind == "logistic_regression")
        return {{{"learning_rate", 0.03}}, {{"learning_rate", 0.1}}, {{"learning_rate", 0.3}}};
    if (kind == "mlp_2h" || kind == "mlp_3h" || kind == "mlp_wide")
        return {{{"learning_rate", 1e-3}}, {{"learning_rate", 3e-3}}};
    throw ValidationError("unknown model kind '" + kind + "'");
}

}  // namespace gridsentry
