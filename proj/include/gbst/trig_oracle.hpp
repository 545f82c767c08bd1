#pragma once

#include "gbst/graph_core.hpp"
#include "gbst/spectral.hpp"

#include <array>
#include <functional>
#include <iosfwd>
#include <string_view>
#include <vector>

namespace gbst {

enum class TrigKind { DCT2, DCT4, DCT8, DST4, DST7 };

inline constexpr std::array<TrigKind, 5> kAllTrigKinds = {
    TrigKind::DCT2, TrigKind::DST7, TrigKind::DCT8, TrigKind::DST4, TrigKind::DCT4};

std::string_view to_string(TrigKind kind);
TrigKind parse_trig_kind(std::string_view text);

/// Closed-form orthonormal matrix with column k = basis vector k (lowest
/// frequency first), sign-canonicalized like derive_gbt. Eigenvalues are the
/// closed-form spectrum of the unit-edge-weight graph realizing the kind.
TransformMatrix trig_matrix(TrigKind kind, int size);

// The unit-edge-weight graph parameters whose GBT equals `kind`.
GraphParams correspondence_params(TrigKind kind);

// Max entrywise |trig - GBT| for the corresponding graph. Throws
// NotACorrespondence if params do not satisfy the kind's defining relation.
double oracle_check(TrigKind kind, const GraphParams& params, int size);

using TrigGenerator = std::function<TransformMatrix(TrigKind, int)>;

struct CorrespondenceResult {
  TrigKind kind;
  int size;
  GraphParams params;
  double deviation;
  bool pass;
};

inline constexpr double kCorrespondenceTolerance = 1e-8;

/// Checks every (kind, size) pair. `generator` defaults to trig_matrix; tests
/// pass a deliberately wrong one as a negative control.
std::vector<CorrespondenceResult> run_correspondence_suite(
    const std::vector<TrigKind>& kinds, const std::vector<int>& sizes,
    const TrigGenerator& generator = trig_matrix);

// "TRIG kind=<kind> N=<N>" followed by the basis rows.
void write_trig_dump(std::ostream& out, TrigKind kind, const TransformMatrix& transform);

}  // namespace gbst
