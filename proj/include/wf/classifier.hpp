#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "wf/rng.hpp"
#include "wf/trace.hpp"

namespace wf {

struct ShapeMismatch : std::runtime_error {
    explicit ShapeMismatch(const std::string& m) : std::runtime_error(m) {}
};
struct EmptyTrainingSet : std::runtime_error {
    EmptyTrainingSet() : std::runtime_error("training set is empty") {}
};
struct DivergedLoss : std::runtime_error {
    DivergedLoss() : std::runtime_error("training loss became non-finite") {}
};

// First f signed sizes scaled by the max wire size into [-1, 1]; shorter
// traces are right-padded with zeros.
std::vector<double> vectorize(const Trace& t, int f);

// Common prediction surface: a length-C probability (or vote-fraction)
// vector per sample.
struct Classifier {
    virtual ~Classifier() = default;
    virtual std::vector<double> predict_proba(const std::vector<double>& v) const = 0;
    virtual int num_classes() const = 0;
    virtual int feature_len() const = 0;
};

int argmax_class(const std::vector<double>& proba);
// Open-world membership score: max class probability.
double monitored_score(const std::vector<double>& proba);

// ---------------------------------------------------------------- k-NN

struct KnnModel : Classifier {
    int k = 1;
    int classes = 0;
    int f = 0;
    std::vector<std::vector<double>> vectors;
    std::vector<int> labels;  // site indices

    std::vector<double> predict_proba(const std::vector<double>& v) const override;
    int num_classes() const override { return classes; }
    int feature_len() const override { return f; }

    // Majority label among the k nearest; ties broken by smaller mean
    // distance, then smaller label index. Score = agreeing fraction.
    std::pair<int, double> predict(const std::vector<double>& v) const;
};

KnnModel knn_fit(const Dataset& train, int f, int k);

// ---------------------------------------------------------------- CNN

// Stacked (conv k5 -> relu -> conv k5 -> relu -> maxpool 2) units followed
// by flatten -> dense -> softmax. Valid convolutions, stride 1.
struct CnnArchitecture {
    int input_len = 1000;
    int num_classes = 0;
    std::vector<int> channels = {32, 64, 128, 256};  // one entry per unit
    int kernel = 5;
    int pool = 2;

    // Length entering the dense layer; throws ShapeMismatch if any stage
    // collapses to zero.
    int flat_len() const;
};

struct TrainConfig {
    int epochs = 30;
    int batch_size = 32;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::uint64_t seed = 1;
    double split_ratio = 0.8;
};

class CnnModel : public Classifier {
public:
    struct Conv {
        int in_ch = 0, out_ch = 0, k = 0;
        std::vector<double> w;  // [out][in][k]
        std::vector<double> b;  // [out]
    };
    struct Dense {
        int in = 0, out = 0;
        std::vector<double> w;  // [out][in]
        std::vector<double> b;
    };

    CnnModel(const CnnArchitecture& arch, std::uint64_t seed);

    std::vector<double> predict_proba(const std::vector<double>& v) const override;
    int num_classes() const override { return arch_.num_classes; }
    int feature_len() const override { return arch_.input_len; }

    // Runs Adam over shuffled mini-batches; returns the per-epoch mean loss.
    std::vector<double> train(const std::vector<std::vector<double>>& xs,
                              const std::vector<int>& ys, const TrainConfig& cfg);

    // Mean cross-entropy over a batch, no parameter update. Used by tests.
    double batch_loss(const std::vector<std::vector<double>>& xs,
                      const std::vector<int>& ys) const;
    // Mean gradient over a batch, laid out like parameters(). Used by the
    // finite-difference check.
    std::vector<double> batch_gradient(const std::vector<std::vector<double>>& xs,
                                       const std::vector<int>& ys) const;
    std::vector<double*> parameters();

    const CnnArchitecture& arch() const { return arch_; }

    void save(const std::string& path) const;
    static CnnModel load(const std::string& path);

private:
    CnnArchitecture arch_;
    std::vector<Conv> convs_;  // two per unit
    Dense dense_;

    friend struct CnnTape;
};

// ---------------------------------------------------------------- eval

struct EvalResult {
    double accuracy = 0.0;
    std::vector<std::vector<int>> confusion;  // [true][predicted]
};

EvalResult evaluate_closed(const Classifier& m, const Dataset& test, int f);

// Deterministic stratified split: per class, shuffle and take the first
// ratio for training. Unmonitored traces always land in test.
void split_train_test(const Dataset& ds, double ratio, std::uint64_t seed, Dataset& train,
                      Dataset& test);

}  // namespace wf
