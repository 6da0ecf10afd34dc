#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "agdst/dst_core.hpp"
#include "agdst/error.hpp"
#include "agdst/vocab.hpp"

namespace agdst {

enum class Role : std::uint8_t { System = 0, User = 1, State = 2, Marker = 3 };
enum class Segment : std::uint8_t { Context = 0, State = 1 };

inline constexpr int kRoleCount = 4;
inline constexpr int kSegmentCount = 2;

enum class PassKind { Basic, Amending };
enum class ContextMode { CurrentTurn, FullHistory };

/// Table-6 switches. A disabled kind's surfaces simply never appear; slot
/// tokens still anchor parsing either way.
struct TokenToggles {
  bool ds_markers = true;         // <ds/> </ds>
  bool utterance_markers = true;  // <con/> </con> <sys> <usr>
  bool name_markers = true;       // <name/> </name>
};

struct CharSpan {
  std::size_t begin = 0;
  std::size_t end = 0;  // exclusive
};

/// One dialogue turn: system response (may be empty at turn 1), user
/// utterance, and optional candidate-entity character spans per side.
struct Turn {
  std::string system_response;
  std::string user_utterance;
  std::vector<CharSpan> system_name_spans;
  std::vector<CharSpan> user_name_spans;

  void validate() const {
    if (normalize_text(user_utterance).empty()) {
      throw StructuralError("turn has an empty user utterance");
    }
    check_spans(system_name_spans, system_response, "system");
    check_spans(user_name_spans, user_utterance, "user");
  }

 private:
  static void check_spans(const std::vector<CharSpan>& spans, const std::string& text,
                          const char* side) {
    std::size_t prev_end = 0;
    bool first = true;
    for (const auto& sp : spans) {
      if (sp.begin >= sp.end || sp.end > text.size()) {
        throw StructuralError(std::string("name span out of bounds in ") + side + " utterance");
      }
      if (!first && sp.begin < prev_end) {
        throw StructuralError(std::string("overlapping name spans in ") + side + " utterance");
      }
      prev_end = sp.end;
      first = false;
    }
  }
};

/// Token ids with aligned position / role / segment / loss-mask annotations.
/// The five lists always have equal length and positions run 0..n-1.
struct TaggedSequence {
  std::vector<int> ids;
  std::vector<int> positions;
  std::vector<Role> roles;
  std::vector<Segment> segments;
  std::vector<std::uint8_t> target_mask;

  std::size_t size() const { return ids.size(); }

  void push(int id, Role role, Segment segment, bool in_target = false) {
    ids.push_back(id);
    positions.push_back(static_cast<int>(positions.size()));
    roles.push_back(role);
    segments.push_back(segment);
    target_mask.push_back(in_target ? 1 : 0);
  }

  std::size_t target_count() const {
    std::size_t n = 0;
    for (auto m : target_mask) n += m;
    return n;
  }
};

namespace detail {

struct TokenRun {
  std::vector<std::string> tokens;
  std::vector<Role> roles;

  void push(std::string token, Role role) {
    tokens.push_back(std::move(token));
    roles.push_back(role);
  }
  void append(const TokenRun& o) {
    tokens.insert(tokens.end(), o.tokens.begin(), o.tokens.end());
    roles.insert(roles.end(), o.roles.begin(), o.roles.end());
  }
  std::size_t size() const { return tokens.size(); }
};

/// Tokenizes one utterance, inserting <name/>...</name> around the spans.
inline void emit_utterance(const std::string& text, const std::vector<CharSpan>& spans,
                           Role word_role, bool name_markers, TokenRun& out) {
  std::size_t cursor = 0;
  auto emit_words = [&](std::string_view piece) {
    for (auto& tok : tokenize(normalize_text(piece))) out.push(std::move(tok), word_role);
  };
  for (const auto& sp : spans) {
    emit_words(std::string_view(text).substr(cursor, sp.begin - cursor));
    if (name_markers) out.push(kNameOpen, Role::Marker);
    emit_words(std::string_view(text).substr(sp.begin, sp.end - sp.begin));
    if (name_markers) out.push(kNameClose, Role::Marker);
    cursor = sp.end;
  }
  emit_words(std::string_view(text).substr(cursor));
}

inline TokenRun turn_run(const Turn& turn, const TokenToggles& toggles) {
  turn.validate();
  TokenRun run;
  if (toggles.utterance_markers) run.push(kConOpen, Role::Marker);
  if (toggles.utterance_markers) run.push(kSysToken, Role::Marker);
  emit_utterance(turn.system_response, turn.system_name_spans, Role::System,
                 toggles.name_markers, run);
  if (toggles.utterance_markers) run.push(kUsrToken, Role::Marker);
  emit_utterance(turn.user_utterance, turn.user_name_spans, Role::User, toggles.name_markers,
                 run);
  if (toggles.utterance_markers) run.push(kConClose, Role::Marker);
  return run;
}

/// State spans carry Role::State throughout, boundary markers included, so
/// the conditioning state and the generation target share one labeling.
inline TokenRun state_run(const DialogueState& state, const Schema& schema,
                          const TokenToggles& toggles) {
  if (state.size() != schema.size()) {
    throw StructuralError("serialize_state: state is not over the given schema");
  }
  TokenRun run;
  if (toggles.ds_markers) run.push(kDsOpen, Role::State);
  for (std::size_t i = 0; i < schema.size(); ++i) {
    run.push(schema.slot(i).token(), Role::State);
    const SlotValue& v = state.at(i);
    if (v.is_literal()) {
      for (auto& tok : tokenize(v.text())) run.push(std::move(tok), Role::State);
    } else {
      run.push(v.surface(), Role::State);
    }
  }
  if (toggles.ds_markers) run.push(kDsClose, Role::State);
  return run;
}

}  // namespace detail

/// <con/> <sys> R_t <usr> U_t </con>, with <name/> wraps around name spans.
inline std::vector<std::string> serialize_turn(const Turn& turn,
                                               const TokenToggles& toggles = {}) {
  return detail::turn_run(turn, toggles).tokens;
}

/// <ds/> then, per schema slot, <domain-slot> followed by the value tokens,
/// then </ds>.
inline std::vector<std::string> serialize_state(const DialogueState& state, const Schema& schema,
                                                const TokenToggles& toggles = {}) {
  return detail::state_run(state, schema, toggles).tokens;
}

struct ParseResult {
  DialogueState state;
  std::vector<std::string> warnings;
};

/// Slot-token-anchored total parse of a (possibly malformed) decoded state.
/// Missing slots fall back per slot; duplicated slots take the last
/// occurrence; every anomaly becomes a warning, never an error.
inline ParseResult parse_state(std::span<const std::string> tokens, const Schema& schema,
                               const DialogueState& fallback) {
  if (fallback.size() != schema.size()) {
    throw StructuralError("parse_state: fallback is not over the given schema");
  }
  ParseResult result{fallback, {}};

  // anchor = any slot token or </ds>
  std::vector<int> anchor_slot(tokens.size(), -1);
  std::vector<bool> is_anchor(tokens.size(), false);
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    if (tokens[t] == kDsClose) {
      is_anchor[t] = true;
      continue;
    }
    if (tokens[t].size() > 2 && tokens[t].front() == '<' && tokens[t].back() == '>') {
      if (auto idx = schema.find(std::string_view(tokens[t]).substr(1, tokens[t].size() - 2))) {
        is_anchor[t] = true;
        anchor_slot[t] = static_cast<int>(*idx);
      }
    }
  }

  std::vector<std::optional<std::size_t>> last_pos(schema.size());
  std::vector<int> occurrences(schema.size(), 0);
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    if (anchor_slot[t] >= 0) {
      last_pos[static_cast<std::size_t>(anchor_slot[t])] = t;
      ++occurrences[static_cast<std::size_t>(anchor_slot[t])];
    }
  }

  for (std::size_t i = 0; i < schema.size(); ++i) {
    const std::string key = schema.slot(i).key();
    if (!last_pos[i]) {
      result.warnings.push_back("slot " + key + " missing from sequence; kept fallback value");
      continue;
    }
    if (occurrences[i] > 1) {
      result.warnings.push_back("slot " + key + " appears " + std::to_string(occurrences[i]) +
                                " times; last occurrence wins");
    }
    std::size_t begin = *last_pos[i] + 1;
    std::size_t end = begin;
    while (end < tokens.size() && !is_anchor[end]) ++end;

    std::vector<std::string> words;
    bool saw_nm = false, saw_dc = false, stray = false;
    for (std::size_t t = begin; t < end; ++t) {
      const std::string& tok = tokens[t];
      if (tok == kNotMentionedSurface) {
        saw_nm = true;
      } else if (tok == kDontCareSurface) {
        saw_dc = true;
      } else if (is_reserved_surface(tok)) {
        stray = true;
      } else {
        words.push_back(tok);
      }
    }

    if (stray) {
      result.warnings.push_back("slot " + key + " value contains stray special tokens; dropped");
    }
    if ((saw_nm || saw_dc) && !words.empty()) {
      result.warnings.push_back("slot " + key + " mixes a sentinel with words; words win");
    }
    if (!words.empty()) {
      std::string text = normalize_value_text(join(words));
      if (text.empty()) {
        result.warnings.push_back("slot " + key + " value is empty after normalization");
        result.state.set(i, SlotValue::not_mentioned());
      } else {
        result.state.set(i, SlotValue::literal(text));
      }
    } else if (saw_dc && !saw_nm) {
      result.state.set(i, SlotValue::dont_care());
    } else if (saw_nm && saw_dc) {
      result.warnings.push_back("slot " + key + " has both sentinels; <nm> wins");
      result.state.set(i, SlotValue::not_mentioned());
    } else if (saw_nm) {
      result.state.set(i, SlotValue::not_mentioned());
    } else {
      result.warnings.push_back("slot " + key + " has an empty value; treated as <nm>");
      result.state.set(i, SlotValue::not_mentioned());
    }
  }
  return result;
}

struct PassInputOptions {
  ContextMode context_mode = ContextMode::CurrentTurn;
  bool state_memory = true;  // include the serialized conditioning state
  TokenToggles toggles;
  std::size_t max_length = 256;
};

struct PassInput {
  TaggedSequence sequence;
  std::vector<std::string> warnings;
};

/// Full model input for one pass: open marker, serialized context (current
/// turn, or history + current turn), serialized conditioning state, close
/// marker. Over-long inputs drop history turns oldest-first; the current
/// turn and the conditioning state are never truncated.
inline PassInput build_pass_input(PassKind pass, const Turn& turn,
                                  const DialogueState& conditioning_state, const Schema& schema,
                                  const Vocabulary& vocab, const PassInputOptions& options = {},
                                  std::span<const Turn> history = {}) {
  PassInput out;

  detail::TokenRun current = detail::turn_run(turn, options.toggles);
  detail::TokenRun state;
  if (options.state_memory) {
    state = detail::state_run(conditioning_state, schema, options.toggles);
  }

  std::vector<detail::TokenRun> history_runs;
  if (options.context_mode == ContextMode::FullHistory) {
    history_runs.reserve(history.size());
    for (const auto& h : history) history_runs.push_back(detail::turn_run(h, options.toggles));
  }

  const std::size_t fixed = 2 + current.size() + state.size();
  if (fixed > options.max_length) {
    throw StructuralError("pass input exceeds max length even without history (" +
                          std::to_string(fixed) + " > " + std::to_string(options.max_length) +
                          ")");
  }
  std::size_t total = fixed;
  for (const auto& r : history_runs) total += r.size();
  std::size_t drop = 0;
  while (total > options.max_length && drop < history_runs.size()) {
    total -= history_runs[drop].size();
    ++drop;
  }
  if (drop > 0) {
    out.warnings.push_back("dropped " + std::to_string(drop) +
                           " oldest history turn(s) to fit max length");
  }

  TaggedSequence& seq = out.sequence;
  const bool basic = pass == PassKind::Basic;
  seq.push(vocab.id_of(basic ? kGenOpen : kAmendOpen), Role::Marker, Segment::Context);
  auto push_run = [&](const detail::TokenRun& run, Segment segment) {
    for (std::size_t i = 0; i < run.size(); ++i) {
      seq.push(vocab.encode_token(run.tokens[i]), run.roles[i], segment);
    }
  };
  for (std::size_t h = drop; h < history_runs.size(); ++h) {
    push_run(history_runs[h], Segment::Context);
  }
  push_run(current, Segment::Context);
  push_run(state, Segment::State);
  seq.push(vocab.id_of(basic ? kGenClose : kAmendClose), Role::Marker, Segment::Context);
  return out;
}

/// Appends the gold state serialization plus <eos> as the supervised target.
inline void append_target(TaggedSequence& input, const DialogueState& gold, const Schema& schema,
                          const Vocabulary& vocab, const TokenToggles& toggles = {}) {
  if (input.target_count() != 0) {
    throw StructuralError("append_target: input already has target positions");
  }
  detail::TokenRun run = detail::state_run(gold, schema, toggles);
  for (std::size_t i = 0; i < run.size(); ++i) {
    input.push(vocab.encode_token(run.tokens[i]), Role::State, Segment::State, true);
  }
  input.push(vocab.eos_id(), Role::State, Segment::State, true);
}

}  // namespace agdst
