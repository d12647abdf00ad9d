#pragma once

#include "pvfim/problem.hpp"

namespace pvfim {

/// Global value bounds of the two objectives over X x Y. These feed the
/// barrier-value bound; closed forms exist for the synthetic instance and a
/// grid sweep supplies them for anything else.
struct ValueBounds {
    double min_F = 0.0;      // min of F over X x Y
    double max_F = 0.0;      // max of F over X x Y
    double max_abs_f = 0.0;  // max of |f| over X x Y
};

inline ValueBounds example3_value_bounds() {
    const double pi = std::acos(-1.0);
    ValueBounds b;
    // Both squared deviations are largest at x = 4*pi, y = (-40,-20), where sin x = 0.
    double A = 40.0 + 4.0 * pi, B = 20.0 + 2.0 * pi;
    b.min_F = -A * A - B * B + std::sin(4.0 * pi);
    // Both deviations vanish at (pi/2, (pi/2, pi/4)) where sin x = 1.
    b.max_F = 1.0;
    b.max_abs_f = 80.0 * 80.0 + 4.0 * pi;
    return b;
}

/// Every derived smoothness/step/iteration constant the convergence theory
/// consumes, for one choice of J, sigma, and the free parameter l2.
///
/// Two groups share letter names in the source material: the J-indexed
/// gradient bounds (here M0_J, M1_J, M2_J) and the global value bounds
/// (here valueMin_F, valueMax_F, valueMax_absf). They are distinct fields.
struct ConstantsReport {
    int J = 1;
    double sigma = 0.0, l2 = 0.0;

    double M0_J = 0.0;  // bound on ||grad y_j||      : J
    double M1_J = 0.0;  // bound on ||grad f_j||      : L0 (J+1)
    double M2_J = 0.0;  // smoothness of f_J          : L1 (1+J)^2 + (L0 J / L1)(1+J)(L2 + L3 J)

    double L11 = 0.0;   // x-gradient smoothness of the barrier objective
    double L12 = 0.0;   // cross smoothness of its y-gradient
    double L_G = 0.0;   // y-smoothness of the barrier objective
    double L_phi = 0.0; // smoothness of the inner value function

    double valueMin_F = 0.0, valueMax_F = 0.0, valueMax_absf = 0.0;
    double M3 = 0.0;    // bound on |inner value function|

    double l1_J = 0.0;
    double lbar_J = 0.0;

    double tau_bound = 0.0;  // largest admissible barrier weight at this sigma
    double T_min = 0.0;      // required upper-step count
    double K_min = 0.0;      // required ascent-step count

    double alpha_theory = 0.0;  // 1/L1
    double beta_theory = 0.0;   // 1/L_G
    double eta_theory = 0.0;    // 1/(L_phi/2 + l2)
};

/// Evaluates the closed-form constants for a problem spec at (J, sigma, l2).
/// Requires mu < L_G (the ascent contraction factor must be positive) and
/// sigma, l2 in (0,1).
inline ConstantsReport compute_constants(const LipschitzSpec& s, double eps,
                                         const ValueBounds& vb, int J, double sigma,
                                         double l2) {
    if (J < 1) throw std::invalid_argument("compute_constants: J must be >= 1");
    if (!(sigma > 0.0 && sigma < 1.0))
        throw std::invalid_argument("compute_constants: sigma must lie in (0,1)");
    if (!(l2 > 0.0 && l2 < 1.0))
        throw std::invalid_argument("compute_constants: l2 must lie in (0,1)");
    if (!(s.c > 0.0)) throw std::invalid_argument("compute_constants: c must be positive");
    if (!(s.L1 > 0.0)) throw std::invalid_argument("compute_constants: L1 must be positive");

    ConstantsReport r;
    r.J = J;
    r.sigma = sigma;
    r.l2 = l2;

    const double Jd = static_cast<double>(J);
    r.M0_J = Jd;
    r.M1_J = s.L0 * (Jd + 1.0);
    r.M2_J = s.L1 * (1.0 + Jd) * (1.0 + Jd) +
             (s.L0 * Jd / s.L1) * (1.0 + Jd) * (s.L2 + s.L3 * Jd);

    r.L11 = s.h1 + (r.M2_J + s.L1) / s.c + (r.M1_J + s.L0) * (r.M1_J + s.L0) / (s.c * s.c);
    r.L12 = s.h1 + s.L1 / s.c + s.L0 * (r.M1_J + s.L0) / (s.c * s.c);
    r.L_G = s.h1 + (2.0 / s.c) * s.L1 + (4.0 / (s.c * s.c)) * s.L0 * s.L0;
    if (!(s.mu < r.L_G))
        throw std::invalid_argument("compute_constants: requires mu < L_G");
    r.L_phi = r.L11 * (1.0 + r.L12 / s.mu);

    r.valueMin_F = vb.min_F;
    r.valueMax_F = vb.max_F;
    r.valueMax_absf = vb.max_abs_f;
    r.M3 = std::max(std::abs(vb.min_F + std::log(s.c)),
                    std::abs(vb.max_F + std::log(2.0 * vb.max_abs_f + eps)));

    r.l1_J = std::max({1.0, r.L11 * s.H, r.L_G});
    double num = 2.0 * s.H * (r.L_phi / 2.0 + l2) + s.h0 + 4.0 * s.L0 / s.c;
    r.lbar_J = std::max(num * num / l2, r.l1_J);

    r.tau_bound = s.c * sigma * sigma / (36.0 * s.H * Jd * s.L0 * r.lbar_J);
    r.T_min = 9.0 * r.M3 * r.lbar_J / (sigma * sigma);
    r.K_min = 2.0 * std::log(sigma * sigma / (36.0 * s.M * r.lbar_J * r.lbar_J)) /
              std::log(1.0 - s.mu / r.L_G);

    r.alpha_theory = 1.0 / s.L1;
    r.beta_theory = 1.0 / r.L_G;
    r.eta_theory = 1.0 / (r.L_phi / 2.0 + l2);
    return r;
}

}  // namespace pvfim
