#pragma once

#include <memory>

#include "statopt/models.hpp"
#include "statopt/operator.hpp"

namespace statopt {

// θ − η∇f(θ). On a negated log-likelihood this is gradient ascent.
ParamPoint gd_step(const Objective& f, const AlgorithmConfig& cfg, const ParamPoint& theta);

// θ − (H + λ_min I)⁻¹∇f(θ). Throws NumericalError on a singular system.
ParamPoint newton_step(const Objective& f, const AlgorithmConfig& cfg, const ParamPoint& theta);

// Minimizer of g·s + ½h·s² + L|s|³ over s = y − θ (d = 1).
ParamPoint cnm_step(const Objective& f, const AlgorithmConfig& cfg, const ParamPoint& theta);

// (1/n) Σ X_i tanh(θᵀX_i); population version when data is null.
ParamPoint em_step_mixture(const MixtureData* data, const ParamPoint& theta);

// Dense solve H x = g by LU with partial pivoting.
// Singular when max|H_ij| = 0 or |det H| < 1e−14 · max|H_ij|^d.
Vec solve_dense(const Mat& h, const Vec& g);

// Model-appropriate defaults: NLR GD uses half the largest admissible step,
// NLR CNM uses L = (4p−1)!!(4p−1)p/3, polynomial CNM uses (p−1)(p−2)/6.
AlgorithmConfig default_config(const ModelSpec& model, Algorithm algorithm);

// Largest admissible GD step for NLR: 1/((4p−1)!!·2p).
double regression_max_step(int p);

OperatorHandle make_operator(const ModelSpec& model, Algorithm algorithm, Level level,
                             std::shared_ptr<const SampleSet> data, const AlgorithmConfig& config);

// Sample-level shorthand; the model is read off the data.
OperatorHandle make_sample_operator(std::shared_ptr<const SampleSet> data, Algorithm algorithm,
                                    const AlgorithmConfig& config);

// Fixed-point map built from an arbitrary objective (tests, exploratory runs).
OperatorHandle make_objective_operator(const Objective& f, Algorithm algorithm,
                                       const AlgorithmConfig& config, ModelSpec tag = {});

}  // namespace statopt
