#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace cnf {

inline constexpr std::size_t kDefaultMaxLen = 120;

/// Character-level vocabulary. Index 0 is PAD, index 1 is UNK, and observed
/// characters follow in ascending character code.
class Vocab {
 public:
  static constexpr std::size_t kPad = 0;
  static constexpr std::size_t kUnk = 1;

  /// Throws Error(EmptyCorpus) for an empty corpus.
  static Vocab build(const std::vector<std::string>& corpus);
  static Vocab from_characters(std::string characters);

  std::size_t size() const noexcept { return characters_.size() + 2; }
  /// Column for `c`, or kUnk when unseen.
  std::size_t index_of(char c) const noexcept;
  bool contains(char c) const noexcept { return index_of(c) != kUnk; }
  /// Character at a column; PAD and UNK have none.
  char character_at(std::size_t index) const;
  const std::string& characters() const noexcept { return characters_; }

  nlohmann::json to_json() const;
  static Vocab from_json(const nlohmann::json& j);

  friend bool operator==(const Vocab&, const Vocab&) = default;

 private:
  std::string characters_;  // sorted, unique
  std::vector<int> lookup_ = std::vector<int>(256, -1);
};

/// L x V binary matrix; rows past valid_len are PAD one-hots.
struct OneHot {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t valid_len = 0;
  std::vector<std::size_t> tokens;  // column index of the hot entry per row
  std::size_t unk_count = 0;

  double at(std::size_t row, std::size_t col) const { return tokens.at(row) == col ? 1.0 : 0.0; }
  /// Dense row-major copy, for inspection and tests.
  std::vector<double> dense() const;
};

/// Throws Error(TooLong) when smiles is longer than max_len and
/// Error(InvalidConfig) when max_len is zero.
OneHot encode_onehot(std::string_view smiles, const Vocab& vocab, std::size_t max_len = kDefaultMaxLen);

/// Inverse of encode_onehot over the valid rows; UNK rows decode to '?'.
std::string decode_onehot(const OneHot& x, const Vocab& vocab);

}  // namespace cnf
