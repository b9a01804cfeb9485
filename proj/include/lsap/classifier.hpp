#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace lsap {

// Backend contract for binary text classification (the dialogue-act filter
// and the discriminative baseline both run through this). Implementations
// must score deterministically for a fixed handle.

struct BinaryExample {
    std::string text;
    bool positive = false;
};

struct ClassifierHyperparams {
    double learning_rate = 0.1;
    int epochs = 8;
    uint64_t seed = 0;
    double held_out_fraction = 0.1;  // stratified held-out split for reporting
};

struct ClassifierReport {
    double held_out_accuracy = 0.0;
    double held_out_precision = 0.0;  // positive class
    size_t train_count = 0;
    size_t held_out_count = 0;
};

class ClassifierHandle {
  public:
    virtual ~ClassifierHandle() = default;
};

using ClassifierHandlePtr = std::shared_ptr<const ClassifierHandle>;

class ClassifierBackend {
  public:
    virtual ~ClassifierBackend() = default;
    virtual ClassifierHandlePtr train(const std::vector<BinaryExample>& data,
                                      const ClassifierHyperparams& hp,
                                      ClassifierReport* report) = 0;
    // Positive-class probabilities, one per input, input order preserved.
    virtual std::vector<double> predict_proba(const ClassifierHandlePtr& handle,
                                              const std::vector<std::string>& texts) const = 0;
    virtual void save(const ClassifierHandlePtr& handle, const std::string& path) const = 0;
    virtual ClassifierHandlePtr load(const std::string& path) const = 0;
};

// Logistic regression over hashed word unigrams + bigrams. Fast, dependency
// free, and fully deterministic; stands in for the paper-scale encoder.
class HashedLinearClassifier : public ClassifierBackend {
  public:
    explicit HashedLinearClassifier(int hash_bits = 18) : hash_bits_(hash_bits) {}

    ClassifierHandlePtr train(const std::vector<BinaryExample>& data,
                              const ClassifierHyperparams& hp,
                              ClassifierReport* report) override;
    std::vector<double> predict_proba(const ClassifierHandlePtr& handle,
                                      const std::vector<std::string>& texts) const override;
    void save(const ClassifierHandlePtr& handle, const std::string& path) const override;
    ClassifierHandlePtr load(const std::string& path) const override;

  private:
    int hash_bits_;
};

}  // namespace lsap
