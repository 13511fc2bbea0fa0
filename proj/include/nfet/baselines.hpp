#pragma once

#include <string>

#include "nfet/design.hpp"
#include "nfet/geometry.hpp"

namespace nfet::baselines {

enum class BaselineKind { Focus, PointTarget, TrmEt };

std::string to_string(BaselineKind kind);

/// MRT beams w_k = sqrt(p_k) h_k / ||h_k|| and W_0 = p_0 a_c a_c^H with
/// a_c the steering vector of the target centre and p_0 = P_max - sum p_k.
/// Powers make every SINR constraint hold with equality; with p_0 eliminated
/// the conditions are one K x K linear system, solved directly.
design::DesignSolution focus_design(const design::DesignProblem& problem, const geometry::ArrayGeometry& array,
                                    const geometry::EtParams& eta);

/// SDR designed for a single scatterer at (x_c, y_c) with parameters (x_c, y_c),
/// then scored with the problem's (extended-target) operators. The design
/// covariances live in span(h_1..h_K, a_c, da_c/dx, da_c/dy), which is used as an
/// exact reduction basis.
design::DesignSolution point_target_design(const design::DesignProblem& problem,
                                           const geometry::ArrayGeometry& array, const geometry::EtParams& eta,
                                           const design::SolverSettings& settings = {},
                                           const conic::Backend* backend = nullptr);

/// Minimises tr(R_x^-1) under the same SINR and power constraints, scored with
/// the problem's operators.
///
/// The objective and constraints are invariant under unitaries acting on the
/// orthogonal complement of span(h_k), so an optimum has the form
/// W_k = U_H A_k U_H^H (k >= 1), W_0 = U_H A_0 U_H^H + c Pi_perp, and the SDP is
/// solved over the K x K blocks A_k and the scalar c:
///   min tr(A^-1) + (N - k_h) / c,  A = sum_k A_k.
design::DesignSolution trm_et_design(const design::DesignProblem& problem, const design::SolverSettings& settings = {},
                                     const conic::Backend* backend = nullptr);

}  // namespace nfet::baselines
