#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rthdc/hdc.hpp"

namespace rthdc::corpus {

using hdc::Symbol;

// Maps UTF-8 text onto the 27-symbol alphabet: ASCII letters pass through
// lowercased, every other code point (digits, punctuation, whitespace,
// accented letters) becomes one separator symbol, and each malformed UTF-8
// byte also becomes one separator. Nothing is collapsed or trimmed, so the
// mapping is total, deterministic, and idempotent under re-rendering.
std::vector<Symbol> normalize(std::string_view utf8);

// Renders symbols back to text: letters as-is, the separator as a space.
std::string render(std::span<const Symbol> symbols);

std::array<std::uint64_t, hdc::kAlphabetSize> frequencies(std::span<const Symbol> symbols);

struct Language {
    std::string label;
    std::vector<Symbol> train;
    std::vector<std::vector<Symbol>> sentences;
};

// Languages sorted by label so associative-memory insertion order (and with
// it the tie-break order) is reproducible.
struct Dataset {
    std::vector<Language> languages;

    const Language* find(const std::string& label) const;
};

// Loads `<label>.txt` training files and matching one-sentence-per-line test
// files. Training labels drive the dataset: a label with no test file is
// kept with an empty sentence list, a test-only label is ignored, and both
// cases are reported on `warn` (when given). An unreadable directory or an
// empty training split is an error.
Dataset load_dataset(const std::filesystem::path& train_dir,
                     const std::filesystem::path& test_dir, std::ostream* warn = nullptr);

// Deterministic synthetic corpus: language i draws from a categorical
// distribution over a block of letters anchored at position i*26/languages
// (block width max(2, 26/languages), so up to 13 languages have disjoint
// supports) plus the separator at about one draw in six. All randomness
// derives from `seed` via fixed per-language, per-sentence sub-streams.
Dataset synth_corpus(std::uint64_t seed, std::uint32_t languages, std::uint32_t train_len,
                     std::uint32_t sentences, std::uint32_t sentence_len);

// Writes a dataset in the load_dataset layout: dir/train/<label>.txt and
// dir/test/<label>.txt (one sentence per line). Rendered with spaces for
// the separator, so loading the files back reproduces the dataset exactly.
void write_dataset(const Dataset& ds, const std::filesystem::path& dir);

} // namespace rthdc::corpus
