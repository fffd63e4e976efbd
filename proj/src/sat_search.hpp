// Complete search for single faults under one procedure with a SAT solver.
// The frames are encoded with two rails per net (value is one, value is
// zero), so X behaves exactly as in the three-valued simulator. Nets that can
// only be 0 or 1 share a single variable between both rails.
#pragma once

#include "atpg_model.hpp"

#include <memory>

namespace dftclk::detail {

/// Incremental solver for one procedure. The fault-free frames are encoded
/// once and shared by every fault posed to the session, together with the
/// clauses the solver learns about them; each fault's own constraints are
/// retired after its query. Answers depend on the sequence of queries, so
/// callers that need reproducible cubes must pose faults in a fixed order.
class SatSession {
public:
  SatSession(const Shared& s, const ProcedureModel& pm);
  ~SatSession();
  SatSession(SatSession&&) noexcept;
  SatSession& operator=(SatSession&&) noexcept;

  /// Detected with a cube over every variable the session has encoded,
  /// Untestable when no assignment detects the fault, Aborted when the solver
  /// used up `conflict_limit` conflicts.
  SearchResult solve(const Fault& f, int conflict_limit);

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// One-off query through a fresh session.
SearchResult sat_search(const Shared& s, const Fault& f, const ProcedureModel& pm, int conflict_limit);

}  // namespace dftclk::detail
