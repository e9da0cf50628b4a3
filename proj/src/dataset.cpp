#include "gridsentry/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "gridsentry/common.hpp"

namespace gridsentry {

LabelEncoder LabelEncoder::fit(const std::vector<int>& labels) {
    if (labels.empty()) throw ValidationError("label encoder: empty label vector");
    LabelEncoder enc;
    enc.classes_ = labels;
    std::sort(enc.classes_.begin(), enc.classes_.end());
    enc.classes_.erase(std::unique(enc.classes_.begin(), enc.classes_.end()), enc.classes_.end());
    return enc;
}

int LabelEncoder::encode(int original) const {
    auto it = std::lower_bound(classes_.begin(), classes_.end(), original);
    if (it == classes_.end() || *it != original)
        throw ValidationError("label encoder: unknown class " + std::to_string(original));
    return static_cast<int>(it - classes_.begin());
}

int LabelEncoder::decode(int encoded) const {
    if (encoded < 0 || encoded >= num_classes())
        throw ValidationError("label encoder: encoded id " + std::to_string(encoded) +
                              " out of range");
    return classes_[static_cast<std::size_t>(encoded)];
}

LabeledDataset clean(const WaveformRecord& record, const std::vector<int>& labels) {
    const std::size_t rows = record.data.rows();
    const std::size_t cols = record.data.cols();
    if (labels.size() != rows)
        throw ValidationError("clean: label count " + std::to_string(labels.size()) +
                              " does not match sample count " + std::to_string(rows));
    if (cols == 0) throw ValidationError("clean: record has no channels");

    std::vector<std::size_t> keep;
    keep.reserve(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        bool finite = true;
        for (std::size_t c = 0; c < cols; ++c) {
            if (!std::isfinite(record.data(r, c))) {
                finite = false;
                break;
            }
        }
        if (finite) keep.push_back(r);
    }
    if (keep.empty()) throw ValidationError("clean: every row contains non-finite values");

    LabeledDataset ds;
    ds.features = Matrix(keep.size(), cols);
    std::vector<int> raw(keep.size());
    for (std::size_t i = 0; i < keep.size(); ++i) {
        const auto src = record.data.row(keep[i]);
        std::copy(src.begin(), src.end(), ds.features.row(i).begin());
        raw[i] = labels[keep[i]];
    }
    ds.encoder = LabelEncoder::fit(raw);
    ds.labels.resize(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) ds.labels[i] = ds.encoder.encode(raw[i]);
    ds.feature_names.reserve(cols);
    for (const auto& ch : record.channels) ds.feature_names.push_back(ch.name);
    return ds;
}

namespace {

LabeledDataset take_rows(const LabeledDataset& ds, const std::vector<std::size_t>& rows) {
    LabeledDataset out;
    out.features = Matrix(rows.size(), ds.features.cols());
    out.labels.resize(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto src = ds.features.row(rows[i]);
        std::copy(src.begin(), src.end(), out.features.row(i).begin());
        out.labels[i] = ds.labels[rows[i]];
    }
    out.encoder = ds.encoder;
    out.feature_names = ds.feature_names;
    return out;
}

}  // namespace

SplitDataset stratified_split(const LabeledDataset& ds, double test_fraction,
                              std::uint64_t seed) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
        throw ValidationError("stratified split: test fraction must lie in (0, 1)");
    const int k = ds.encoder.num_classes();
    if (k < 1 || ds.size() == 0) throw ValidationError("stratified split: empty dataset");

    std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < ds.labels.size(); ++i)
        by_class[static_cast<std::size_t>(ds.labels[i])].push_back(i);
    for (int c = 0; c < k; ++c) {
        if (by_class[static_cast<std::size_t>(c)].size() < 2)
            throw ValidationError("stratified split: class " +
                                  std::to_string(ds.encoder.decode(c)) +
                                  " has fewer than 2 samples");
    }

    // Largest-remainder apportionment of the rounded total test count.
    const auto total = static_cast<double>(ds.size());
    const auto want_total =
        static_cast<std::size_t>(std::llround(test_fraction * total));
    std::vector<std::size_t> alloc(static_cast<std::size_t>(k));
    std::vector<std::pair<double, int>> remainders;  // (-remainder, class) for sorting
    std::size_t base_total = 0;
    for (int c = 0; c < k; ++c) {
        const double quota =
            test_fraction * static_cast<double>(by_class[static_cast<std::size_t>(c)].size());
        const auto base = static_cast<std::size_t>(std::floor(quota));
        alloc[static_cast<std::size_t>(c)] = base;
        base_total += base;
        remainders.emplace_back(-(quota - std::floor(quota)), c);
    }
    std::sort(remainders.begin(), remainders.end());  // largest remainder first, then class id
    std::size_t leftover = want_total > base_total ? want_total - base_total : 0;
    for (const auto& [neg_rem, c] : remainders) {
        (void)neg_rem;
        if (leftover == 0) break;
        auto& a = alloc[static_cast<std::size_t>(c)];
        if (a + 1 < by_class[static_cast<std::size_t>(c)].size()) {
            ++a;
            --leftover;
        }
    }

    Rng rng(seed);
    std::vector<std::size_t> test_rows;
    std::vector<std::size_t> train_rows;
    for (int c = 0; c < k; ++c) {
        auto rows = by_class[static_cast<std::size_t>(c)];
        Rng class_rng = rng.fork(static_cast<std::uint64_t>(c));
        class_rng.shuffle(rows);
        const std::size_t n_test = alloc[static_cast<std::size_t>(c)];
        test_rows.insert(test_rows.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(n_test));
        train_rows.insert(train_rows.end(), rows.begin() + static_cast<std::ptrdiff_t>(n_test), rows.end());
    }
    std::sort(test_rows.begin(), test_rows.end());
    std::sort(train_rows.begin(), train_rows.end());

    SplitDataset split;
    split.train = take_rows(ds, train_rows);
    split.test = take_rows(ds, test_rows);
    split.seed = seed;
    return split;
}

Scaler Scaler::fit(const Matrix& train_features) {
    const std::size_t n = train_features.rows();
    const std::size_t d = train_features.cols();
    if (n == 0 || d == 0) throw ValidationError("scaler: empty training matrix");

    Scaler s;
    s.mu.assign(d, 0.0);
    s.sigma.assign(d, 0.0);
    for (std::size_t r = 0; r < n; ++r) {
        const auto row = train_features.row(r);
        for (std::size_t c = 0; c < d; ++c) s.mu[c] += row[c];
    }
    for (std::size_t c = 0; c < d; ++c) s.mu[c] /= static_cast<double>(n);
    for (std::size_t r = 0; r < n; ++r) {
        const auto row = train_features.row(r);
        for (std::size_t c = 0; c < d; ++c) {
            const double delta = row[c] - s.mu[c];
            s.sigma[c] += delta * delta;
        }
    }
    for (std::size_t c = 0; c < d; ++c) {
        s.sigma[c] = std::sqrt(s.sigma[c] / static_cast<double>(n));
        if (s.sigma[c] <= 0.0) {
            s.sigma[c] = 1.0;
            s.constant_columns.push_back(c);
        }
    }
    return s;
}

Matrix Scaler::transform(const Matrix& features) const {
    if (features.cols() != mu.size())
        throw ContractError("scaler: feature width " + std::to_string(features.cols()) +
                            " does not match fitted width " + std::to_string(mu.size()));
    Matrix out(features.rows(), features.cols());
    for (std::size_t r = 0; r < features.rows(); ++r) {
        const auto src = features.row(r);
        auto dst = out.row(r);
        for (std::size_t c = 0; c < mu.size(); ++c) dst[c] = (src[c] - mu[c]) / sigma[c];
    }
    return out;
}

Matrix Scaler::inverse_transform(const Matrix& features) const {
    if (features.cols() != mu.size())
        throw ContractError("scaler: feature width " + std::to_string(features.cols()) +
                            " does not match fitted width " + std::to_string(mu.size()));
    Matrix out(features.rows(), features.cols());
    for (std::size_t r = 0; r < features.rows(); ++r) {
        const auto src = features.row(r);
        auto dst = out.row(r);
        for (std::size_t c = 0; c < mu.size(); ++c) dst[c] = src[c] * sigma[c] + mu[c];
    }
    return out;
}

std::vector<double> balanced_class_weights(const std::vector<int>& labels, int num_classes) {
    if (num_classes < 1) throw ValidationError("class weights: num_classes must be positive");
    std::vector<std::size_t> counts(static_cast<std::size_t>(num_classes), 0);
    for (int y : labels) {
        if (y < 0 || y >= num_classes)
            throw ValidationError("class weights: label " + std::to_string(y) + " out of range");
        ++counts[static_cast<std::size_t>(y)];
    }
    std::vector<double> weights(static_cast<std::size_t>(num_classes), 0.0);
    for (int c = 0; c < num_classes; ++c) {
        const auto n_c = counts[static_cast<std::size_t>(c)];
        if (n_c == 0)
            throw ValidationError("class weights: class " + std::to_string(c) +
                                  " has no samples");
        weights[static_cast<std::size_t>(c)] =
            static_cast<double>(labels.size()) /
            (static_cast<double>(num_classes) * static_cast<double>(n_c));
    }
    return weights;
}

void write_dataset_csv(const std::string& path, const LabeledDataset& ds) {
    if (ds.feature_names.size() != ds.features.cols())
        throw ValidationError("dataset csv: feature name count does not match width");
    std::ostringstream out;
    for (std::size_t c = 0; c < ds.feature_names.size(); ++c) {
        if (c) out << ',';
        out << ds.feature_names[c];
    }
    out << ",label\n";
    for (std::size_t r = 0; r < ds.size(); ++r) {
        const auto row = ds.features.row(r);
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) out << ',';
            out << format_double(row[c]);
        }
        out << ',' << ds.encoder.decode(ds.labels[r]) << '\n';
    }
    write_file(path, out.str());
}

}  // namespace gridsentry
