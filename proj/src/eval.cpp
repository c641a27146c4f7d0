#include "cmfl/eval.hpp"

#include <algorithm>
#include <cmath>

#include "cmfl/errors.hpp"

namespace cmfl {

std::size_t ConfusionMatrix::total() const {
    std::size_t t = 0;
    for (std::size_t c : counts) t += c;
    return t;
}

ConfusionMatrix confusion(const std::vector<std::size_t>& gold, const std::vector<std::size_t>& pred,
                          const std::vector<std::string>& label_vocab) {
    if (gold.size() != pred.size()) throw LengthMismatch("gold vs pred");
    if (gold.empty()) throw LengthMismatch("no examples");
    const std::size_t C = label_vocab.size();
    ConfusionMatrix cm;
    cm.label_vocab = label_vocab;
    cm.counts.assign(C * C, 0);
    for (std::size_t i = 0; i < gold.size(); ++i) {
        if (gold[i] >= C) throw UnknownLabel("gold#" + std::to_string(gold[i]));
        if (pred[i] >= C) throw UnknownLabel("pred#" + std::to_string(pred[i]));
        ++cm.counts[gold[i] * C + pred[i]];
    }
    return cm;
}

MetricsReport metrics(const ConfusionMatrix& cm) {
    const std::size_t C = cm.C();
    MetricsReport r;
    r.per_class.resize(C);
    std::size_t total = 0, correct = 0;
    for (std::size_t c = 0; c < C; ++c) {
        std::size_t tp = cm.at(c, c), row = 0, col = 0;
        for (std::size_t j = 0; j < C; ++j) {
            row += cm.at(c, j);
            col += cm.at(j, c);
        }
        total += row;
        correct += tp;
        ClassMetrics& m = r.per_class[c];
        m.label = cm.label_vocab[c];
        m.support = row;
        m.precision = col > 0 ? static_cast<double>(tp) / static_cast<double>(col) : 0.0;
        m.recall = row > 0 ? static_cast<double>(tp) / static_cast<double>(row) : 0.0;
        m.f1 = (m.precision + m.recall) > 0.0
                   ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
                   : 0.0;
    }
    const double n = static_cast<double>(total);
    for (std::size_t c = 0; c < C; ++c) {
        const ClassMetrics& m = r.per_class[c];
        r.macro_precision += m.precision;
        r.macro_recall += m.recall;
        r.macro_f1 += m.f1;
        const double w = static_cast<double>(m.support) / n;
        r.weighted_precision += w * m.precision;
        r.weighted_recall += w * m.recall;
        r.weighted_f1 += w * m.f1;
    }
    r.macro_precision /= static_cast<double>(C);
    r.macro_recall /= static_cast<double>(C);
    r.macro_f1 /= static_cast<double>(C);
    r.accuracy = static_cast<double>(correct) / n;
    return r;
}

namespace {

// Regularized lower incomplete gamma P(a, x); series for x < a+1,
// continued fraction for the complement otherwise (Lentz's method).
double gamma_p(double a, double x) {
    if (x <= 0.0) return 0.0;
    const double lga = std::lgamma(a);
    if (x < a + 1.0) {
        double ap = a, sum = 1.0 / a, del = sum;
        for (int i = 0; i < 500; ++i) {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if (std::fabs(del) < std::fabs(sum) * 1e-16) break;
        }
        return sum * std::exp(-x + a * std::log(x) - lga);
    }
    const double tiny = 1e-300;
    double b = x + 1.0 - a, c = 1.0 / tiny, dd = 1.0 / b, h = dd;
    for (int i = 1; i <= 500; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        dd = an * dd + b;
        if (std::fabs(dd) < tiny) dd = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        dd = 1.0 / dd;
        const double del = dd * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-16) break;
    }
    const double q = std::exp(-x + a * std::log(x) - lga) * h;
    return 1.0 - q;
}

}  // namespace

double chi_square_sf(double x, std::size_t df) {
    if (x < 0.0) throw DomainError("negative chi-square statistic");
    if (df < 1) throw DomainError("df must be >= 1");
    return 1.0 - gamma_p(static_cast<double>(df) / 2.0, x / 2.0);
}

PairedTable paired_table(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b,
                         std::size_t k) {
    if (a.size() != b.size()) throw LengthMismatch("paired outputs");
    if (a.empty()) throw LengthMismatch("no paired items");
    PairedTable t;
    t.k = k;
    t.n.assign(k * k, 0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] >= k || b[i] >= k) throw UnknownLabel("paired#" + std::to_string(i));
        ++t.n[a[i] * k + b[i]];
    }
    return t;
}

SmResult stuart_maxwell(const PairedTable& table) {
    const std::size_t k = table.k;
    std::vector<std::size_t> row(k, 0), col(k, 0);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) {
            row[i] += table.n[i * k + j];
            col[j] += table.n[i * k + j];
        }

    // Drop categories with no mass at all, then drop the smallest-marginal
    // retained category for the k'-1 reduction (the statistic is
    // drop-invariant when S is nonsingular).
    std::vector<std::size_t> kept;
    for (std::size_t i = 0; i < k; ++i)
        if (row[i] + col[i] > 0) kept.push_back(i);
    if (kept.size() < 2) throw SingularCovariance();
    std::size_t drop = kept[0];
    for (std::size_t i : kept)
        if (row[i] + col[i] < row[drop] + col[drop]) drop = i;
    std::vector<std::size_t> use;
    for (std::size_t i : kept)
        if (i != drop) use.push_back(i);

    const std::size_t m = use.size();
    std::vector<double> d(m), S(m * m);
    for (std::size_t a = 0; a < m; ++a) {
        const std::size_t i = use[a];
        d[a] = static_cast<double>(row[i]) - static_cast<double>(col[i]);
        for (std::size_t b = 0; b < m; ++b) {
            const std::size_t j = use[b];
            S[a * m + b] = (a == b)
                ? static_cast<double>(row[i] + col[i]) - 2.0 * static_cast<double>(table.n[i * k + i])
                : -static_cast<double>(table.n[i * k + j] + table.n[j * k + i]);
        }
    }

    // Solve S x = d, Gaussian elimination with partial pivoting.
    std::vector<double> x = d;
    std::vector<double> A = S;
    for (std::size_t colm = 0; colm < m; ++colm) {
        std::size_t piv = colm;
        for (std::size_t r = colm + 1; r < m; ++r)
            if (std::fabs(A[r * m + colm]) > std::fabs(A[piv * m + colm])) piv = r;
        if (std::fabs(A[piv * m + colm]) < 1e-12) throw SingularCovariance();
        if (piv != colm) {
            for (std::size_t c = 0; c < m; ++c) std::swap(A[colm * m + c], A[piv * m + c]);
            std::swap(x[colm], x[piv]);
        }
        for (std::size_t r = colm + 1; r < m; ++r) {
            const double f = A[r * m + colm] / A[colm * m + colm];
            if (f == 0.0) continue;
            for (std::size_t c = colm; c < m; ++c) A[r * m + c] -= f * A[colm * m + c];
            x[r] -= f * x[colm];
        }
    }
    for (std::size_t r = m; r-- > 0;) {
        for (std::size_t c = r + 1; c < m; ++c) x[r] -= A[r * m + c] * x[c];
        x[r] /= A[r * m + r];
    }

    SmResult res;
    for (std::size_t a = 0; a < m; ++a) res.chi2 += d[a] * x[a];
    if (res.chi2 < 0.0) res.chi2 = 0.0;  // round-off guard
    res.df = m;
    res.p_value = chi_square_sf(res.chi2, res.df);
    return res;
}

}  // namespace cmfl
