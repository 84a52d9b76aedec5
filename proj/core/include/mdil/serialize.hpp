// serialize.hpp
// JSON codecs for every exchangeable object: matrices, matrix sequences,
// decompositions, dilation specs, Kraus channels, verification reports,
// and trajectory dumps (JSON lines).  Parsers throw BadInput on schema
// violations; numbers round-trip bit-exactly.
//
// Schemas:
//   matrix         {"n": N, "rows": [[..], ..]}
//   sequence       {"n": N, "matrices": [[[..], ..], ..], "homogeneous": b}
//   decomposition  {"mode": "full"|"sparse",
//                   "terms": [{"weight": w, "beta": [..]}, ..]}
//   dilation       {"n": N, "mode": "universal"|"minimal", "labels": [..],
//                   "coupling": [..flat forward table..],
//                   "homogeneous": b, "q": [[..], ..],
//                   "negative_side": [..] (optional)}
//   kraus          {"n": N, "kraus": [[[[re, im], ..], ..], ..]}
//   report         {"command": s, "timestamp": s (optional),
//                   "all_pass": b, "checks": [{"name", "t", "tolerance",
//                   "max_abs_deviation", "pass", "detail" (optional)}, ..]}
//
// The coupling table lists the flat image forward[x] of every point
// x = i * |G| + g with g = j * num_labels + label_position, so an external
// tool can replay the global dynamics bit-exactly.

#pragma once

#include <string>
#include <vector>

#include "mdil/chain.hpp"
#include "mdil/decompose.hpp"
#include "mdil/dilation.hpp"
#include "mdil/markov.hpp"
#include "mdil/quantum.hpp"
#include "mdil/report.hpp"

namespace mdil {

// Top-level shape of a JSON payload, for command dispatch.
enum class PayloadKind { Matrix, Sequence, Decomposition, Dilation };

PayloadKind payload_kind(const std::string& text);

StochasticMatrix parse_matrix(const std::string& text);

// Accepts a sequence object or a bare matrix (read as homogeneous).
MatrixSequence parse_sequence(const std::string& text);

ConvexDecomposition parse_decomposition(const std::string& text);

DilationSpec parse_dilation(const std::string& text);

std::string write_matrix(const StochasticMatrix& p, bool pretty = false);
std::string write_sequence(const MatrixSequence& seq, bool pretty = false);
std::string write_decomposition(const ConvexDecomposition& dec,
                                bool pretty = false);
std::string write_dilation(const DilationSpec& spec, bool pretty = false);
std::string write_kraus(const KrausChannel& chan, bool pretty = false);

// `timestamp` controls whether a UTC timestamp field is emitted; leaving
// it out makes equal runs byte-identical.
std::string write_report(const VerificationReport& report,
                         const std::string& command, bool timestamp,
                         bool pretty = false);

// One compact JSON object per line.
std::string write_trajectories(const std::vector<TrajectoryRecord>& records);

}  // namespace mdil
