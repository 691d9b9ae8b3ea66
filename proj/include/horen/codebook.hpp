#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "horen/adaptor.hpp"
#include "horen/geometry.hpp"
#include "horen/hopfield.hpp"
#include "horen/types.hpp"

namespace horen {

/// One stored association. The key never changes after insertion; only the
/// payload may be retrained.
struct CodebookEntry {
  UnitVector key;
  Payload payload;
  EntryLabel label;
  std::uint64_t created_at = 0;  // index of the edit that created the entry
};

/// Ordered, append-only store of entries plus a row-major key matrix for
/// linear scans. Entry order is insertion order; created_at strictly
/// increases across entries; nothing is ever deleted.
class Codebook {
 public:
  explicit Codebook(Index dim);

  Index dim() const noexcept { return dim_; }
  Index size() const noexcept { return size_; }

  /// All keys as a size() x dim() matrix; row i is entry i's key.
  Eigen::Ref<const RowMatrixX> keys() const {
    return key_storage_.topRows(size_);
  }

  const CodebookEntry& entry(Index i) const { return entries_.at(i); }

  /// Appends an entry. created_at must exceed the previous entry's.
  /// Returns the new entry's index.
  Index insert(const UnitVector& key, Payload payload, EntryLabel label,
               std::uint64_t created_at);

  /// Replaces entry i's payload. Keys and labels have no mutating access.
  void update_payload(Index i, Payload payload);

  /// Hands out the next edit index and advances the edit counter.
  std::uint64_t next_edit_index() noexcept { return edits_seen_++; }
  std::uint64_t edits_seen() const noexcept { return edits_seen_; }

 private:
  Index dim_;
  Index size_ = 0;
  RowMatrixX key_storage_;  // capacity rows; top size_ rows are live
  std::vector<CodebookEntry> entries_;
  std::uint64_t edits_seen_ = 0;
};

/// Outcome of scoring a query against the book.
struct RoutingDecision {
  UnitVector refined_query;
  VectorX scores;  // one cosine per entry, in entry order
  std::optional<Index> best_index;
  Scalar best_score = 0.0;  // -inf when the book is empty
  bool matched = false;
  int hopfield_steps_taken = 0;
};

/// Scores q against every key and applies the acceptance threshold. The
/// best index is the lowest index attaining the maximum score; matched
/// requires best_score strictly above the threshold. An empty book yields
/// matched = false, no best index, and best_score = -inf.
RoutingDecision match(const Codebook& book, const UnitVector& q,
                      Scalar threshold);

/// Full routing: normalize the raw query, refine it against the stored keys
/// (damped, params.max_steps rounds; skipped when the book is empty), then
/// match. Scale-invariant in the raw query by construction.
RoutingDecision route(const Codebook& book, const VectorX& raw_query,
                      const HopfieldParams& params);

enum class EditAction {
  Inserted,          // no match: new entry
  Refined,           // match with the same label: payload retrained in place
  ConflictInserted,  // match with a different label: new entry, old kept
};

struct EditOutcome {
  EditAction action = EditAction::Inserted;
  Index entry_index = 0;
  bool payload_converged = false;
  RoutingDecision decision;
};

/// One lifelong-editing step. Routes the raw query; on no match inserts a
/// fresh entry, on a same-label match retrains that entry's payload, on a
/// conflicting-label match inserts a new entry and leaves the old one
/// untouched. The stored key is always the normalized raw query, not the
/// refined one, so later lookups face the same geometry this edit saw.
EditOutcome apply_edit(Codebook& book, const VectorX& raw_query,
                       const EditTarget& target, const HopfieldParams& params,
                       const AdaptorConfig& adaptor_config);

}  // namespace horen
