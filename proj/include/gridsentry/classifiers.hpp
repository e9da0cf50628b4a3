#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "gridsentry/common.hpp"
#include "gridsentry/dataset.hpp"
#include "gridsentry/matrix.hpp"
#include "json.hpp"

namespace gridsentry {

// Every model fits on encoded labels 0..K-1 and emits one probability
// simplex per input row. predict() is argmax with ties going to the lowest
// class index.
class ProbabilisticClassifier {
public:
    virtual ~ProbabilisticClassifier() = default;

    virtual std::string kind() const = 0;
    virtual void fit(const Matrix& x, const std::vector<int>& y, int num_classes,
                     const std::vector<double>& sample_weights) = 0;
    virtual Matrix predict_proba(const Matrix& x) const = 0;
    virtual nlohmann::json save_state() const = 0;
    virtual void load_state(const nlohmann::json& state) = 0;

    std::vector<int> predict(const Matrix& x) const;
    int num_classes() const { return num_classes_; }
    std::size_t feature_width() const { return feature_width_; }

protected:
    void check_fit_inputs(const Matrix& x, const std::vector<int>& y, int num_classes,
                          const std::vector<double>& sample_weights);
    void check_predict_input(const Matrix& x) const;

    int num_classes_ = 0;
    std::size_t feature_width_ = 0;
};

// A model request: canonical kind name, numeric hyperparameter overrides
// (unset keys take the documented defaults), whether to weight classes by
// inverse frequency, and the seed for any internal randomness.
struct ModelSpec {
    std::string kind;
    std::map<std::string, double> params;
    bool balanced_class_weights = true;
    std::uint64_t seed = 0;
};

// The canonical eleven model names, in reporting order.
const std::vector<std::string>& model_kinds();
std::map<std::string, double> default_params(const std::string& kind);
std::vector<ModelSpec> default_model_specs(std::uint64_t seed);

std::unique_ptr<ProbabilisticClassifier> make_model(const ModelSpec& spec);

// make_model + class weighting + fit. Kinds that cannot honor class weights
// (knn, gaussian_nb) ignore them and append a note to warnings.
std::unique_ptr<ProbabilisticClassifier> fit_model(const ModelSpec& spec, const Matrix& x,
                                                   const std::vector<int>& y, int num_classes,
                                                   std::vector<std::string>* warnings = nullptr);

inline constexpr int kArtifactFormatVersion = 1;

// Self-contained JSON artifact: spec, label mapping, scaler and the fitted
// model state, so a stream run needs nothing but the artifact and a record.
nlohmann::json save_model(const ProbabilisticClassifier& model, const ModelSpec& spec,
                          const LabelEncoder& encoder, const Scaler& scaler,
                          const std::vector<std::string>& feature_names);

struct LoadedModel {
    ModelSpec spec;
    LabelEncoder encoder;
    Scaler scaler;
    std::vector<std::string> feature_names;
    std::unique_ptr<ProbabilisticClassifier> model;
};

LoadedModel load_model(const nlohmann::json& artifact);

struct OfflineMetrics {
    double accuracy = 0.0;
    double precision = 0.0;  // support-weighted
    double recall = 0.0;
    double f1 = 0.0;
    std::size_t support = 0;
};

OfflineMetrics evaluate_offline(const ProbabilisticClassifier& model, const Matrix& x,
                                const std::vector<int>& y, int num_classes);

// Stratified k-fold cross validation over a hyperparameter grid. The best
// row is the highest mean fold accuracy, ties keeping the earliest grid
// entry; the returned spec is the base spec with that row merged in.
struct GridSearchResult {
    ModelSpec best;
    struct Row {
        std::map<std::string, double> overrides;
        std::vector<double> fold_accuracy;
        double mean_accuracy = 0.0;
    };
    std::vector<Row> table;
};

GridSearchResult grid_search(const ModelSpec& base,
                             const std::vector<std::map<std::string, double>>& grid,
                             const Matrix& x, const std::vector<int>& y, int num_classes,
                             int folds, std::uint64_t seed,
                             std::vector<std::string>* warnings = nullptr);

// Small built-in grid per kind for the opt-in tuning pass.
std::vector<std::map<std::string, double>> default_tuning_grid(const std::string& kind);

}  // namespace gridsentry
