#pragma once

#include <span>

#include "oed/criterion.hpp"
#include "oed/sqp.hpp"

namespace oed {

/// Packs a design problem as an NLP over x = (w, q): bounds w ∈ [0,1]^m and
/// q ∈ Θ, equality Σw = m_max. The weight part of the Hessian diagonal is
/// exact; the control part uses second central differences of the objective.
///
/// The returned callbacks share a one-entry cache of J(q), so the spec must be
/// used from one thread at a time.
NlpSpec make_design_nlp(const DesignProblem& problem);

/// Splits x = (w, q).
std::span<const double> weights_of(const DesignProblem& problem, std::span<const double> x);
std::span<const double> controls_of(const DesignProblem& problem, std::span<const double> x);

} // namespace oed
