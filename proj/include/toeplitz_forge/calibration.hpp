#pragma once

// Frozen constants produced by tools/calibrate. Regenerate with
//   ./build/tools/calibrate > calibration_run.txt
// and copy the printed tables here; tests treat them as regression baselines.

#include <optional>

namespace tforge::calibration {

inline constexpr int kExactEllMax = 60;

struct lem_entry {
    int n, d;
    double C;
};

// C(n,d) = max over ell <= 200 and legal m <= 24 of (value - 1) (4/3)^m,
// rounded up in the ninth significant digit.
inline constexpr lem_entry kLemHard[] = {
    {2, 0, 1.389174841e+00}, {2, 1, 2.000000002e+00}, {2, 2, 4.000000004e+00},
    {3, 0, 1.000000001e+00}, {3, 1, 2.000000002e+00}, {3, 2, 4.000000004e+00},
    {4, 0, 1.000000001e+00}, {4, 1, 2.000000002e+00}, {4, 2, 4.000000004e+00},
};

// Algebra constant of the Cauchy product at m = 4: sup over j + k <= 60 of the
// binomial-weighted convolution sum bounding ||(a*b)_k||_{C^j}.
inline constexpr double kProductC0 = 2.400435653e+00;

// Two-class constant of the sharp product: largest ||f # g||_{2r,2R,m} / (||f||_{r,R,m} ||g||_{2r,2R,m})
// over 20 random polynomial symbol pairs per geometry (seeds 1000..1019, K = 2, j <= 8),
// classes (r, R, m) in {(0.5,1,4), (1,8,4), (1,16,6), (2,64,4)}.
inline constexpr double kSharpClassC = 4.502322034e-01;

inline std::optional<double> lem_hard_constant(int n, int d) {
    for (const auto& e : kLemHard)
        if (e.n == n && e.d == d) return e.C;
    return std::nullopt;
}

}  // namespace tforge::calibration
