#pragma once

namespace agdst {

inline constexpr const char* kVersion = "0.1.0";

// Bumped when any on-disk format (vocab, checkpoint, corpus, predictions) changes.
inline constexpr int kFormatVersion = 1;

}  // namespace agdst
