#pragma once

#include <algorithm>
#include <fstream>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "agdst/dst_core.hpp"
#include "agdst/error.hpp"
#include "agdst/util.hpp"
#include "agdst/version.hpp"

namespace agdst {

enum class SpecialKind {
  PassMarker,
  ContextBoundary,
  Role,
  StateBoundary,
  SlotName,
  ValueSentinel,
  NameBoundary,
  Pad,
  EndOfSequence,
};

struct SpecialToken {
  std::string surface;
  SpecialKind kind;
};

inline constexpr const char* kGenOpen = "<gen/>";
inline constexpr const char* kGenClose = "</gen>";
inline constexpr const char* kAmendOpen = "<amend/>";
inline constexpr const char* kAmendClose = "</amend>";
inline constexpr const char* kConOpen = "<con/>";
inline constexpr const char* kConClose = "</con>";
inline constexpr const char* kSysToken = "<sys>";
inline constexpr const char* kUsrToken = "<usr>";
inline constexpr const char* kDsOpen = "<ds/>";
inline constexpr const char* kDsClose = "</ds>";
inline constexpr const char* kNameOpen = "<name/>";
inline constexpr const char* kNameClose = "</name>";
inline constexpr const char* kPadToken = "<pad>";
inline constexpr const char* kEosToken = "<eos>";
inline constexpr const char* kUnkToken = "<unk>";

/// The fixed special tokens plus one slot-name token per schema slot, in a
/// stable order so ids survive token ablations and vocabulary rebuilds.
inline std::vector<SpecialToken> special_registry(const Schema& schema) {
  std::vector<SpecialToken> regs = {
      {kGenOpen, SpecialKind::PassMarker},      {kGenClose, SpecialKind::PassMarker},
      {kAmendOpen, SpecialKind::PassMarker},    {kAmendClose, SpecialKind::PassMarker},
      {kConOpen, SpecialKind::ContextBoundary}, {kConClose, SpecialKind::ContextBoundary},
      {kSysToken, SpecialKind::Role},           {kUsrToken, SpecialKind::Role},
      {kDsOpen, SpecialKind::StateBoundary},    {kDsClose, SpecialKind::StateBoundary},
      {kNotMentionedSurface, SpecialKind::ValueSentinel},
      {kDontCareSurface, SpecialKind::ValueSentinel},
      {kNameOpen, SpecialKind::NameBoundary},   {kNameClose, SpecialKind::NameBoundary},
      {kPadToken, SpecialKind::Pad},            {kEosToken, SpecialKind::EndOfSequence},
  };
  for (const auto& slot : schema.slots()) {
    regs.push_back({slot.token(), SpecialKind::SlotName});
  }
  return regs;
}

/// True for surfaces that never count as value words when parsing states.
inline bool is_reserved_surface(std::string_view token) {
  static const std::vector<std::string_view> fixed = {
      kGenOpen,  kGenClose, kAmendOpen, kAmendClose, kConOpen,   kConClose,
      kSysToken, kUsrToken, kDsOpen,    kDsClose,    kNameOpen,  kNameClose,
      kPadToken, kEosToken, kUnkToken};
  return std::find(fixed.begin(), fixed.end(), token) != fixed.end();
}

/// Whitespace tokenizer. Text is expected pre-normalized; special-token
/// surfaces are whitespace-delimited in every serialization, so they pass
/// through atomically and are never synthesized from plain words.
inline std::vector<std::string> tokenize(std::string_view text) {
  return split_whitespace(text);
}

/// token <-> id bijection with the special block at the front, then <unk>,
/// then corpus words ordered by (frequency desc, surface asc).
class Vocabulary {
 public:
  Vocabulary() = default;

  static Vocabulary build(const std::vector<std::string>& corpus_texts, const Schema& schema,
                          std::size_t min_freq = 1) {
    if (min_freq < 1) throw ConfigError("build_vocab: min_freq must be >= 1");
    Vocabulary v;
    for (const auto& st : special_registry(schema)) v.push_token(st.surface);
    v.n_special_ = v.tokens_.size();
    v.unk_id_ = static_cast<int>(v.tokens_.size());
    v.push_token(kUnkToken);

    std::map<std::string, std::size_t> freq;
    for (const auto& text : corpus_texts) {
      for (auto& tok : tokenize(normalize_text(text))) {
        if (v.ids_.count(tok)) continue;  // specials never become word tokens
        ++freq[tok];
      }
    }
    std::vector<std::pair<std::string, std::size_t>> words(freq.begin(), freq.end());
    std::stable_sort(words.begin(), words.end(), [](const auto& a, const auto& b) {
      if (a.second != b.second) return a.second > b.second;
      return a.first < b.first;
    });
    for (const auto& [word, count] : words) {
      if (count >= min_freq) v.push_token(word);
    }
    return v;
  }

  std::size_t size() const { return tokens_.size(); }
  std::size_t special_count() const { return n_special_; }
  int unk_id() const { return unk_id_; }
  int pad_id() const { return id_of(kPadToken); }
  int eos_id() const { return id_of(kEosToken); }

  bool contains(std::string_view token) const { return ids_.count(std::string(token)) > 0; }

  /// Exact lookup; throws when the surface is not registered.
  int id_of(std::string_view token) const {
    auto it = ids_.find(std::string(token));
    if (it == ids_.end()) throw StructuralError("token not in vocabulary: " + std::string(token));
    return it->second;
  }

  /// Lookup with the OOV rule: unknown words map to <unk>.
  int encode_token(std::string_view token) const {
    auto it = ids_.find(std::string(token));
    return it == ids_.end() ? unk_id_ : it->second;
  }

  std::vector<int> encode(const std::vector<std::string>& tokens) const {
    std::vector<int> ids;
    ids.reserve(tokens.size());
    for (const auto& t : tokens) ids.push_back(encode_token(t));
    return ids;
  }

  const std::string& token_of(int id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size()) {
      throw StructuralError("token id out of range: " + std::to_string(id));
    }
    return tokens_[static_cast<std::size_t>(id)];
  }

  std::vector<std::string> decode(const std::vector<int>& ids) const {
    std::vector<std::string> tokens;
    tokens.reserve(ids.size());
    for (int id : ids) tokens.push_back(token_of(id));
    return tokens;
  }

  /// FNV-1a over the token list; checkpoints refuse to load under a mismatch.
  std::uint64_t hash() const {
    std::string all;
    for (const auto& t : tokens_) {
      all += t;
      all += '\n';
    }
    return fnv1a64(all);
  }

  void save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open vocabulary file for writing: " + path);
    out << "# agdst vocabulary v" << kFormatVersion << "\n";
    for (const auto& t : tokens_) out << t << "\n";
    if (!out) throw IoError("failed writing vocabulary file: " + path);
  }

  static Vocabulary load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open vocabulary file: " + path);
    std::string line;
    if (!std::getline(in, line) || line.rfind("# agdst vocabulary", 0) != 0) {
      throw IoError("vocabulary file missing version comment: " + path);
    }
    Vocabulary v;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      v.push_token(line);
    }
    if (v.tokens_.empty()) throw IoError("vocabulary file has no tokens: " + path);
    auto unk = v.ids_.find(kUnkToken);
    if (unk == v.ids_.end()) throw IoError("vocabulary file lacks <unk>: " + path);
    v.unk_id_ = unk->second;
    v.n_special_ = static_cast<std::size_t>(v.unk_id_);
    return v;
  }

  bool operator==(const Vocabulary& o) const { return tokens_ == o.tokens_; }

 private:
  void push_token(const std::string& token) {
    auto [it, inserted] = ids_.emplace(token, static_cast<int>(tokens_.size()));
    if (!inserted) throw StructuralError("duplicate token in vocabulary: " + token);
    tokens_.push_back(token);
  }

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> ids_;
  std::size_t n_special_ = 0;
  int unk_id_ = -1;
};

}  // namespace agdst
