// Oracle run that produces the frozen tables in calibration.hpp.

#include <cmath>
#include <cstdio>

#include "toeplitz_forge/combinatorics.hpp"
#include "toeplitz_forge/covariant.hpp"

using namespace tforge;

namespace {

double lem_constant(int n, int d) {
    double best = 0.0;
    for (int m = lem_hard_min_m(n, d); m <= 24; ++m)
        for (int ell = 0; ell <= 200; ++ell) {
            double excess;
            if (ell <= calibration::kExactEllMax) {
                mpq_class v = lem_hard_sum_exact(n, d, m, ell) - 1;
                mpq_class s = 1;
                for (int i = 0; i < m; ++i) s *= mpq_class(4, 3);
                excess = mpq_class(v * s).get_d();
            } else {
                excess = static_cast<double>((lem_hard_sum_float(n, d, m, ell) - 1.0L) * std::pow(4.0L / 3.0L, m));
            }
            best = std::max(best, excess);
        }
    return best;
}

// sup over j,k of sum_{i<=k, l<=j} binom(j,l)/binom(j+k,l+i) (j+k+1)^m / ((l+i+1)^m (j+k-l-i+1)^m)
double product_constant(int m, int jk_max) {
    double best = 0.0;
    for (int j = 0; j <= jk_max; ++j)
        for (int k = 0; j + k <= jk_max; ++k) {
            long double s = 0.0L;
            for (int i = 0; i <= k; ++i)
                for (int l = 0; l <= j; ++l) {
                    const int a = l + i, b = j + k - l - i;
                    long double lg = std::lgamma(j + 1.0L) - std::lgamma(l + 1.0L) - std::lgamma(j - l + 1.0L);
                    lg -= std::lgamma(j + k + 1.0L) - std::lgamma(a + 1.0L) - std::lgamma(b + 1.0L);
                    lg += m * (std::log(j + k + 1.0L) - std::log(a + 1.0L) - std::log(b + 1.0L));
                    s += std::exp(lg);
                }
            best = std::max(best, static_cast<double>(s));
        }
    return best;
}

// largest ||f # g|| / (||f|| ||g||) over seeds on both geometries, classes with R >= 8 r^3
double sharp_class_constant(unsigned seed_lo, unsigned seed_hi) {
    const std::vector<symbol_params> classes{{0.5, 1.0, 4}, {1.0, 8.0, 4}, {1.0, 16.0, 6}, {2.0, 64.0, 4}};
    double best = 0.0;
    for (const auto& g : {model_geometry::sphere(), model_geometry::bargmann()})
        for (unsigned s = seed_lo; s < seed_hi; ++s) {
            const int K = 2;
            const auto f = random_polynomial_symbol(g, 2 * s, K), h = random_polynomial_symbol(g, 2 * s + 1, K);
            const auto fh = sharp_product(f, h, K);
            for (const auto& c : classes) best = std::max(best, sharp_class_stability(f, h, fh, c, 8).ratio);
        }
    return best;
}

}  // namespace

int main() {
    std::printf("// kLemHard\n");
    for (int n = 2; n <= 4; ++n)
        for (int d = 0; d <= 2; ++d) {
            const double c = lem_constant(n, d);
            std::printf("    {%d, %d, %.9e},  // max excess %.12e\n", n, d, c * (1.0 + 1e-9), c);
        }
    std::printf("// kProductC0 (m = 4, j + k <= 60)\n");
    const double c0 = product_constant(4, 60);
    std::printf("    %.9e  // raw %.12e\n", c0 * (1.0 + 1e-9), c0);
    const double cs = sharp_class_constant(1000, 1020);
    std::printf("// kSharpClassC (seeds 1000..1019)\n    %.9e  // raw %.12e\n", cs * (1.0 + 1e-9), cs);
    return 0;
}
