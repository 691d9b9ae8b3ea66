#include "horen/codebook.hpp"

#include <limits>
#include <utility>

namespace horen {

namespace {
constexpr Index kInitialCapacity = 64;
}

Codebook::Codebook(Index dim) : dim_(dim) {
  if (dim < 1) {
    throw InvalidConfigError("dim must be >= 1");
  }
}

Index Codebook::insert(const UnitVector& key, Payload payload,
                       EntryLabel label, std::uint64_t created_at) {
  if (key.size() != dim_) {
    throw DimensionMismatchError("key is " + std::to_string(key.size()) +
                                 "-dimensional, book is " +
                                 std::to_string(dim_));
  }
  if (payload.value.size() != dim_) {
    throw DimensionMismatchError("payload is " +
                                 std::to_string(payload.value.size()) +
                                 "-dimensional, book is " +
                                 std::to_string(dim_));
  }
  if (size_ > 0 && created_at <= entries_.back().created_at) {
    throw InvalidConfigError("created_at must strictly increase");
  }
  if (size_ == key_storage_.rows()) {
    key_storage_.conservativeResize(
        std::max(kInitialCapacity, key_storage_.rows() * 2), dim_);
  }
  key_storage_.row(size_) = key.vec().transpose();
  entries_.push_back(
      CodebookEntry{key, std::move(payload), std::move(label), created_at});
  // Keep future edit indices ahead of every stored creation index.
  edits_seen_ = std::max(edits_seen_, created_at + 1);
  return size_++;
}

void Codebook::update_payload(Index i, Payload payload) {
  if (payload.value.size() != dim_) {
    throw DimensionMismatchError("payload is " +
                                 std::to_string(payload.value.size()) +
                                 "-dimensional, book is " +
                                 std::to_string(dim_));
  }
  entries_.at(i).payload = std::move(payload);
}

namespace {

RoutingDecision empty_decision(const UnitVector& q) {
  RoutingDecision d;
  d.refined_query = q;
  d.best_score = -std::numeric_limits<Scalar>::infinity();
  return d;
}

}  // namespace

RoutingDecision match(const Codebook& book, const UnitVector& q,
                      Scalar threshold) {
  if (q.size() != book.dim()) {
    throw DimensionMismatchError("query is " + std::to_string(q.size()) +
                                 "-dimensional, book is " +
                                 std::to_string(book.dim()));
  }
  if (book.size() == 0) {
    return empty_decision(q);
  }
  RoutingDecision d;
  d.refined_query = q;
  d.scores.noalias() = book.keys() * q.vec();
  // Lowest index wins ties, so repeat queries resolve to the oldest entry.
  Index best = 0;
  for (Index i = 1; i < d.scores.size(); ++i) {
    if (d.scores[i] > d.scores[best]) {
      best = i;
    }
  }
  d.best_index = best;
  d.best_score = d.scores[best];
  d.matched = d.best_score > threshold;
  return d;
}

RoutingDecision route(const Codebook& book, const VectorX& raw_query,
                      const HopfieldParams& params) {
  params.validate();
  const UnitVector q0 = normalize(raw_query);
  if (book.size() == 0) {
    return empty_decision(q0);
  }
  const detail::LeanRefine refined =
      detail::refine_lean(book.keys(), q0.vec(), params);
  RoutingDecision d =
      match(book, UnitVector::from_unit(refined.q), params.threshold);
  d.hopfield_steps_taken = refined.steps_taken;
  return d;
}

EditOutcome apply_edit(Codebook& book, const VectorX& raw_query,
                       const EditTarget& target, const HopfieldParams& params,
                       const AdaptorConfig& adaptor_config) {
  params.validate();
  adaptor_config.validate();
  const std::uint64_t edit_index = book.next_edit_index();
  const UnitVector q0 = normalize(raw_query);

  EditOutcome out;
  if (book.size() == 0) {
    out.decision = empty_decision(q0);
  } else {
    const detail::LeanRefine refined =
        detail::refine_lean(book.keys(), q0.vec(), params);
    out.decision =
        match(book, UnitVector::from_unit(refined.q), params.threshold);
    out.decision.hopfield_steps_taken = refined.steps_taken;
  }

  if (out.decision.matched &&
      book.entry(*out.decision.best_index).label == target.label) {
    // Same fact re-asserted: refine the existing payload, key untouched.
    const Index i = *out.decision.best_index;
    Payload p = train_payload(book.entry(i).payload, target, adaptor_config);
    out.payload_converged = p.trained;
    book.update_payload(i, std::move(p));
    out.action = EditAction::Refined;
    out.entry_index = i;
    return out;
  }

  // No basin claimed this query, or a basin holding a different fact:
  // insert a fresh entry keyed by the pre-refinement query.
  Payload p = train_payload(Payload::cold(book.dim()), target, adaptor_config);
  out.payload_converged = p.trained;
  out.entry_index =
      book.insert(q0, std::move(p), target.label, edit_index);
  out.action = out.decision.matched ? EditAction::ConflictInserted
                                    : EditAction::Inserted;
  return out;
}

}  // namespace horen
