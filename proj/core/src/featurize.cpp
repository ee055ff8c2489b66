#include "cnf/featurize.hpp"

#include <algorithm>
#include <string>

#include "cnf/error.hpp"

namespace cnf {

namespace {
constexpr int kVocabFormatVersion = 1;
constexpr const char* kPadToken = "<PAD>";
constexpr const char* kUnkToken = "<UNK>";
}  // namespace

Vocab Vocab::from_characters(std::string characters) {
  std::sort(characters.begin(), characters.end());
  characters.erase(std::unique(characters.begin(), characters.end()), characters.end());
  Vocab v;
  v.characters_ = std::move(characters);
  for (std::size_t i = 0; i < v.characters_.size(); ++i)
    v.lookup_[static_cast<unsigned char>(v.characters_[i])] = static_cast<int>(i + 2);
  return v;
}

Vocab Vocab::build(const std::vector<std::string>& corpus) {
  if (corpus.empty()) throw Error(ErrorCode::EmptyCorpus, "cannot build a vocabulary from an empty corpus");
  std::vector<char> seen(256, 0);
  std::string chars;
  for (const std::string& s : corpus) {
    for (char c : s) {
      auto& flag = seen[static_cast<unsigned char>(c)];
      if (!flag) {
        flag = 1;
        chars.push_back(c);
      }
    }
  }
  return from_characters(std::move(chars));
}

std::size_t Vocab::index_of(char c) const noexcept {
  const int i = lookup_[static_cast<unsigned char>(c)];
  return i < 0 ? kUnk : static_cast<std::size_t>(i);
}

char Vocab::character_at(std::size_t index) const {
  if (index < 2 || index >= size()) throw Error(ErrorCode::ShapeMismatch, "vocabulary column has no character");
  return characters_[index - 2];
}

nlohmann::json Vocab::to_json() const {
  nlohmann::json tokens = nlohmann::json::object();
  tokens[kPadToken] = kPad;
  tokens[kUnkToken] = kUnk;
  for (std::size_t i = 0; i < characters_.size(); ++i) tokens[std::string(1, characters_[i])] = i + 2;
  return {{"version", kVocabFormatVersion}, {"tokens", tokens}};
}

Vocab Vocab::from_json(const nlohmann::json& j) {
  if (j.value("version", 0) != kVocabFormatVersion)
    throw Error(ErrorCode::FormatError, "unsupported vocabulary version");
  const auto& tokens = j.at("tokens");
  if (tokens.at(kPadToken).get<std::size_t>() != kPad || tokens.at(kUnkToken).get<std::size_t>() != kUnk)
    throw Error(ErrorCode::FormatError, "vocabulary must map PAD to 0 and UNK to 1");
  std::string chars(tokens.size() - 2, '\0');
  for (const auto& [token, index] : tokens.items()) {
    if (token == kPadToken || token == kUnkToken) continue;
    const auto i = index.get<std::size_t>();
    if (token.size() != 1 || i < 2 || i >= tokens.size())
      throw Error(ErrorCode::FormatError, "bad vocabulary entry '" + token + "'");
    chars[i - 2] = token[0];
  }
  Vocab v = from_characters(chars);
  if (v.characters_ != chars) throw Error(ErrorCode::FormatError, "vocabulary indices are not dense and sorted");
  return v;
}

std::vector<double> OneHot::dense() const {
  std::vector<double> m(rows * cols, 0.0);
  for (std::size_t r = 0; r < rows; ++r) m[r * cols + tokens[r]] = 1.0;
  return m;
}

OneHot encode_onehot(std::string_view smiles, const Vocab& vocab, std::size_t max_len) {
  if (max_len == 0) throw Error(ErrorCode::InvalidConfig, "max_len must be positive");
  if (smiles.size() > max_len)
    throw Error(ErrorCode::TooLong,
                "SMILES of length " + std::to_string(smiles.size()) + " exceeds max_len " + std::to_string(max_len));
  OneHot x;
  x.rows = max_len;
  x.cols = vocab.size();
  x.valid_len = smiles.size();
  x.tokens.assign(max_len, Vocab::kPad);
  for (std::size_t i = 0; i < smiles.size(); ++i) {
    x.tokens[i] = vocab.index_of(smiles[i]);
    if (x.tokens[i] == Vocab::kUnk) ++x.unk_count;
  }
  return x;
}

std::string decode_onehot(const OneHot& x, const Vocab& vocab) {
  std::string s;
  for (std::size_t i = 0; i < x.valid_len; ++i) s += x.tokens[i] == Vocab::kUnk ? '?' : vocab.character_at(x.tokens[i]);
  return s;
}

}  // namespace cnf
