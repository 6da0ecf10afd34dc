#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "agdst/error.hpp"
#include "agdst/util.hpp"

namespace agdst {

inline constexpr const char* kNotMentionedSurface = "<nm>";
inline constexpr const char* kDontCareSurface = "<dc>";

/// Domain-qualified slot identifier, e.g. restaurant/area.
struct SlotId {
  std::string domain;
  std::string slot;

  SlotId() = default;
  SlotId(std::string_view d, std::string_view s) : domain(d), slot(s) { validate(); }

  /// Flat form used in files and state maps: "restaurant-area".
  std::string key() const { return domain + "-" + slot; }
  /// Special-token form used in sequences: "<restaurant-area>".
  std::string token() const { return "<" + key() + ">"; }

  /// Parses "domain-slot"; the domain never contains a hyphen.
  static SlotId from_key(std::string_view key) {
    auto dash = key.find('-');
    if (dash == std::string_view::npos) {
      throw StructuralError("slot key has no domain-slot separator: " + std::string(key));
    }
    return SlotId(key.substr(0, dash), key.substr(dash + 1));
  }

  bool operator==(const SlotId& o) const = default;

 private:
  void validate() const {
    auto check = [](const std::string& part, bool allow_hyphen) {
      if (part.empty()) throw StructuralError("slot id part is empty");
      for (char c : part) {
        if (is_space(c)) throw StructuralError("slot id contains whitespace: " + part);
        if (std::isupper(static_cast<unsigned char>(c))) {
          throw StructuralError("slot id must be lowercase: " + part);
        }
        if (c == '-' && !allow_hyphen) {
          throw StructuralError("domain must not contain a hyphen: " + part);
        }
      }
    };
    check(domain, false);
    check(slot, true);
  }
};

/// NotMentioned | DontCare | Literal. Literal text is stored normalized.
class SlotValue {
 public:
  enum class Kind { NotMentioned, DontCare, Literal };

  SlotValue() = default;  // NotMentioned

  static SlotValue not_mentioned() { return SlotValue(); }
  static SlotValue dont_care() {
    SlotValue v;
    v.kind_ = Kind::DontCare;
    return v;
  }
  static SlotValue literal(std::string_view raw) {
    SlotValue v;
    v.kind_ = Kind::Literal;
    v.text_ = normalize_value_text(raw);
    if (v.text_.empty()) throw StructuralError("literal slot value is empty after normalization");
    return v;
  }

  /// Lenient ingestion form: sentinels and empty strings map to sentinels.
  static SlotValue from_string(std::string_view raw) {
    std::string norm = normalize_value_text(raw);
    if (norm.empty() || norm == kNotMentionedSurface) return not_mentioned();
    if (norm == kDontCareSurface) return dont_care();
    return literal(norm);
  }

  Kind kind() const { return kind_; }
  bool is_not_mentioned() const { return kind_ == Kind::NotMentioned; }
  bool is_dont_care() const { return kind_ == Kind::DontCare; }
  bool is_literal() const { return kind_ == Kind::Literal; }

  const std::string& text() const {
    if (!is_literal()) throw StructuralError("text() on a non-literal slot value");
    return text_;
  }

  /// Serialized surface: "<nm>", "<dc>", or the literal text.
  std::string surface() const {
    switch (kind_) {
      case Kind::NotMentioned: return kNotMentionedSurface;
      case Kind::DontCare: return kDontCareSurface;
      case Kind::Literal: return text_;
    }
    return {};
  }

  bool operator==(const SlotValue& o) const = default;

 private:
  Kind kind_ = Kind::NotMentioned;
  std::string text_;
};

/// Ordered slot layout plus the optional ontology and correlated-pair
/// declarations that negative sampling and the synthetic generator use.
class Schema {
 public:
  Schema() = default;
  explicit Schema(std::vector<SlotId> slots) : slots_(std::move(slots)) {
    if (slots_.empty()) throw StructuralError("schema needs at least one slot");
    for (std::size_t i = 0; i < slots_.size(); ++i) {
      auto [it, inserted] = index_.emplace(slots_[i].key(), i);
      if (!inserted) throw StructuralError("duplicate slot id: " + slots_[i].key());
    }
  }

  std::size_t size() const { return slots_.size(); }
  const std::vector<SlotId>& slots() const { return slots_; }
  const SlotId& slot(std::size_t i) const { return slots_.at(i); }

  std::optional<std::size_t> find(std::string_view key) const {
    auto it = index_.find(std::string(key));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }
  std::size_t index_of(std::string_view key) const {
    auto i = find(key);
    if (!i) throw StructuralError("unknown slot id: " + std::string(key));
    return *i;
  }

  const std::map<std::string, std::vector<std::string>>& ontology() const { return ontology_; }
  void set_ontology(std::string_view slot_key, std::vector<std::string> values) {
    index_of(slot_key);
    for (auto& v : values) v = normalize_value_text(v);
    ontology_[std::string(slot_key)] = std::move(values);
  }
  const std::vector<std::string>* ontology_values(std::string_view slot_key) const {
    auto it = ontology_.find(std::string(slot_key));
    return it == ontology_.end() ? nullptr : &it->second;
  }

  const std::vector<std::pair<std::size_t, std::size_t>>& correlated_pairs() const {
    return correlated_pairs_;
  }
  void add_correlated_pair(std::string_view a, std::string_view b) {
    auto ia = find(a), ib = find(b);
    if (!ia || !ib) {
      throw ConfigError("correlated pair references unknown slot: " + std::string(a) + " / " +
                        std::string(b));
    }
    correlated_pairs_.emplace_back(*ia, *ib);
  }

  bool same_layout(const Schema& o) const { return slots_ == o.slots_; }

 private:
  std::vector<SlotId> slots_;
  std::unordered_map<std::string, std::size_t> index_;
  std::map<std::string, std::vector<std::string>> ontology_;
  std::vector<std::pair<std::size_t, std::size_t>> correlated_pairs_;
};

/// Total map over a schema's slots; absent goals are explicit NotMentioned.
class DialogueState {
 public:
  DialogueState() = default;
  explicit DialogueState(const Schema& schema) : values_(schema.size()) {}
  explicit DialogueState(std::vector<SlotValue> values) : values_(std::move(values)) {}

  static DialogueState all_not_mentioned(const Schema& schema) { return DialogueState(schema); }

  std::size_t size() const { return values_.size(); }
  const SlotValue& at(std::size_t i) const { return values_.at(i); }
  void set(std::size_t i, SlotValue v) { values_.at(i) = std::move(v); }

  const SlotValue& at(const Schema& schema, std::string_view key) const {
    return values_.at(schema.index_of(key));
  }
  void set(const Schema& schema, std::string_view key, SlotValue v) {
    values_.at(schema.index_of(key)) = std::move(v);
  }

  const std::vector<SlotValue>& values() const { return values_; }

  bool operator==(const DialogueState& o) const = default;

 private:
  std::vector<SlotValue> values_;
};

/// Slots whose value changed at this turn, keyed by schema slot index.
struct StateDelta {
  std::map<std::size_t, SlotValue> changed;

  bool empty() const { return changed.empty(); }
  std::size_t size() const { return changed.size(); }
  bool operator==(const StateDelta& o) const = default;
};

enum class StateOperation { Carryover, Update, Delete, Dontcare };

inline const char* to_string(StateOperation op) {
  switch (op) {
    case StateOperation::Carryover: return "carryover";
    case StateOperation::Update: return "update";
    case StateOperation::Delete: return "delete";
    case StateOperation::Dontcare: return "dontcare";
  }
  return "?";
}

namespace detail {
inline void require_same_schema(const Schema& schema, const DialogueState& a,
                                const DialogueState& b, const char* what) {
  if (a.size() != schema.size() || b.size() != schema.size()) {
    throw StructuralError(std::string(what) + ": states are not over the given schema");
  }
}
}  // namespace detail

inline StateDelta diff_states(const Schema& schema, const DialogueState& prev,
                              const DialogueState& curr) {
  detail::require_same_schema(schema, prev, curr, "diff_states");
  StateDelta delta;
  for (std::size_t i = 0; i < schema.size(); ++i) {
    if (!(prev.at(i) == curr.at(i))) delta.changed.emplace(i, curr.at(i));
  }
  return delta;
}

inline DialogueState apply_delta(const Schema& schema, const DialogueState& prev,
                                 const StateDelta& delta) {
  if (prev.size() != schema.size()) {
    throw StructuralError("apply_delta: state is not over the given schema");
  }
  DialogueState out = prev;
  for (const auto& [idx, value] : delta.changed) {
    if (idx >= schema.size()) throw StructuralError("apply_delta: unknown slot index");
    out.set(idx, value);
  }
  return out;
}

inline StateOperation classify_operation(const SlotValue& prev, const SlotValue& curr) {
  if (curr.is_not_mentioned()) {
    return prev.is_not_mentioned() ? StateOperation::Carryover : StateOperation::Delete;
  }
  if (curr.is_dont_care()) {
    return prev.is_dont_care() ? StateOperation::Carryover : StateOperation::Dontcare;
  }
  return prev == curr ? StateOperation::Carryover : StateOperation::Update;
}

inline std::vector<StateOperation> classify_operations(const Schema& schema,
                                                       const DialogueState& prev,
                                                       const DialogueState& curr) {
  detail::require_same_schema(schema, prev, curr, "classify_operations");
  std::vector<StateOperation> ops(schema.size());
  for (std::size_t i = 0; i < schema.size(); ++i) {
    ops[i] = classify_operation(prev.at(i), curr.at(i));
  }
  return ops;
}

inline bool states_equal(const Schema& schema, const DialogueState& a, const DialogueState& b) {
  detail::require_same_schema(schema, a, b, "states_equal");
  return a == b;
}

}  // namespace agdst
