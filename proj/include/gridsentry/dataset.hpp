#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gridsentry/comtrade.hpp"
#include "gridsentry/matrix.hpp"

namespace gridsentry {

// Bijective mapping between the original class ids and the contiguous range
// 0..K-1 the classifiers operate on.
class LabelEncoder {
public:
    LabelEncoder() = default;
    static LabelEncoder fit(const std::vector<int>& labels);

    int encode(int original) const;  // unknown label -> ValidationError
    int decode(int encoded) const;
    int num_classes() const { return static_cast<int>(classes_.size()); }
    const std::vector<int>& classes() const { return classes_; }

private:
    std::vector<int> classes_;  // sorted original ids; position = encoded id
};

struct LabeledDataset {
    Matrix features;          // N x d
    std::vector<int> labels;  // encoded, in [0, K)
    LabelEncoder encoder;
    std::vector<std::string> feature_names;

    std::size_t size() const { return labels.size(); }
};

// Feature extraction and missing-value removal: keeps the channel values of
// every all-finite row together with its label; sample times are not part of
// the feature set. Throws ValidationError when nothing survives or the label
// vector does not line up.
LabeledDataset clean(const WaveformRecord& record, const std::vector<int>& labels);

struct SplitDataset {
    LabeledDataset train;
    LabeledDataset test;
    std::uint64_t seed = 0;
};

// Stratified partition: per-class test counts assigned by largest-remainder
// rounding of test_fraction * class count (ties by class id ascending),
// sampled without replacement, deterministic in seed. Every class needs at
// least 2 samples.
SplitDataset stratified_split(const LabeledDataset& ds, double test_fraction,
                              std::uint64_t seed);

// Column standardization to zero mean, unit variance (population standard
// deviation, fit on the training split only). Constant columns get sigma
// clamped to 1 -- they map to zero -- and are reported so callers can warn.
class Scaler {
public:
    static Scaler fit(const Matrix& train_features);

    Matrix transform(const Matrix& features) const;
    Matrix inverse_transform(const Matrix& features) const;

    std::vector<double> mu;
    std::vector<double> sigma;
    std::vector<std::size_t> constant_columns;
};

// Inverse-frequency weights: N / (K * count_k) for each sample's class.
std::vector<double> balanced_class_weights(const std::vector<int>& labels, int num_classes);

// CSV export with a header row of feature names plus "label".
void write_dataset_csv(const std::string& path, const LabeledDataset& ds);

}  // namespace gridsentry
