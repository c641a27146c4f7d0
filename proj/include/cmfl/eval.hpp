#ifndef CMFL_EVAL_HPP
#define CMFL_EVAL_HPP

#include <cstddef>
#include <string>
#include <vector>

namespace cmfl {

struct ConfusionMatrix {
    std::vector<std::size_t> counts;  // C x C row-major, rows = gold, cols = predicted
    std::vector<std::string> label_vocab;

    std::size_t C() const { return label_vocab.size(); }
    std::size_t at(std::size_t gold, std::size_t pred) const { return counts[gold * C() + pred]; }
    std::size_t total() const;
};

struct ClassMetrics {
    std::string label;
    double precision = 0.0, recall = 0.0, f1 = 0.0;
    std::size_t support = 0;
};

struct MetricsReport {
    std::vector<ClassMetrics> per_class;
    double macro_precision = 0.0, macro_recall = 0.0, macro_f1 = 0.0;
    double weighted_precision = 0.0, weighted_recall = 0.0, weighted_f1 = 0.0;
    double accuracy = 0.0;
};

// Paired k-category outcomes: n[i*k+j] = items where system A said i, B said j.
struct PairedTable {
    std::vector<std::size_t> n;  // k x k row-major
    std::size_t k = 0;
};

struct SmResult {
    double chi2 = 0.0;
    std::size_t df = 0;
    double p_value = 1.0;
};

ConfusionMatrix confusion(const std::vector<std::size_t>& gold, const std::vector<std::size_t>& pred,
                          const std::vector<std::string>& label_vocab);

MetricsReport metrics(const ConfusionMatrix& cm);

// Marginal-homogeneity chi-square test; reduces to McNemar for k = 2.
SmResult stuart_maxwell(const PairedTable& table);

// Upper-tail chi-square probability via the regularized incomplete gamma.
double chi_square_sf(double x, std::size_t df);

PairedTable paired_table(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b,
                         std::size_t k);

}  // namespace cmfl

#endif
