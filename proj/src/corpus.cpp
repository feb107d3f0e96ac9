#include "rthdc/corpus.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "rthdc/errors.hpp"

namespace rthdc::corpus {

std::vector<Symbol> normalize(std::string_view utf8) {
    std::vector<Symbol> out;
    out.reserve(utf8.size());
    std::size_t i = 0;
    while (i < utf8.size()) {
        const unsigned char b = static_cast<unsigned char>(utf8[i]);
        if (b < 0x80) {
            if (b >= 'a' && b <= 'z')
                out.push_back(Symbol(b - 'a'));
            else if (b >= 'A' && b <= 'Z')
                out.push_back(Symbol(b - 'A'));
            else
                out.push_back(hdc::kSeparator);
            ++i;
            continue;
        }
        // Multi-byte sequence: consume one well-formed code point as a single
        // separator; a malformed lead or continuation byte counts alone.
        std::size_t len = 0;
        if ((b & 0xe0) == 0xc0)
            len = 2;
        else if ((b & 0xf0) == 0xe0)
            len = 3;
        else if ((b & 0xf8) == 0xf0)
            len = 4;
        if (len == 0 || i + len > utf8.size()) {
            out.push_back(hdc::kSeparator);
            ++i;
            continue;
        }
        bool ok = true;
        for (std::size_t k = 1; k < len; ++k)
            if ((static_cast<unsigned char>(utf8[i + k]) & 0xc0) != 0x80) ok = false;
        out.push_back(hdc::kSeparator);
        i += ok ? len : 1;
    }
    return out;
}

std::string render(std::span<const Symbol> symbols) {
    std::string s;
    s.reserve(symbols.size());
    for (Symbol sym : symbols) s.push_back(sym == hdc::kSeparator ? ' ' : hdc::symbol_char(sym));
    return s;
}

std::array<std::uint64_t, hdc::kAlphabetSize> frequencies(std::span<const Symbol> symbols) {
    std::array<std::uint64_t, hdc::kAlphabetSize> f{};
    for (Symbol s : symbols) {
        if (!hdc::symbol_valid(s)) throw ContractError("frequencies: invalid symbol");
        f[s]++;
    }
    return f;
}

const Language* Dataset::find(const std::string& label) const {
    for (const auto& l : languages)
        if (l.label == label) return &l;
    return nullptr;
}

static std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw ConfigError("cannot read file: " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

static std::vector<std::string> labels_in(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir))
        throw ConfigError("not a directory: " + dir.string());
    std::vector<std::string> labels;
    for (const auto& e : std::filesystem::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".txt")
            labels.push_back(e.path().stem().string());
    std::sort(labels.begin(), labels.end());
    return labels;
}

Dataset load_dataset(const std::filesystem::path& train_dir,
                     const std::filesystem::path& test_dir, std::ostream* warn) {
    const auto train_labels = labels_in(train_dir);
    if (train_labels.empty())
        throw ConfigError("no .txt training files in " + train_dir.string());
    std::vector<std::string> test_labels;
    if (!test_dir.empty()) test_labels = labels_in(test_dir);

    Dataset ds;
    for (const auto& label : train_labels) {
        Language lang;
        lang.label = label;
        lang.train = normalize(read_file(train_dir / (label + ".txt")));
        const auto test_file = test_dir / (label + ".txt");
        if (!test_dir.empty() && std::filesystem::is_regular_file(test_file)) {
            std::string text = read_file(test_file);
            std::string_view rest(text);
            while (!rest.empty()) {
                auto nl = rest.find('\n');
                std::string_view line = nl == std::string_view::npos ? rest : rest.substr(0, nl);
                rest = nl == std::string_view::npos ? std::string_view{} : rest.substr(nl + 1);
                if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
                if (!line.empty()) lang.sentences.push_back(normalize(line));
            }
        } else if (warn) {
            *warn << "warning: no test file for label '" << label << "', label kept\n";
        }
        ds.languages.push_back(std::move(lang));
    }
    for (const auto& label : test_labels)
        if (std::find(train_labels.begin(), train_labels.end(), label) == train_labels.end() &&
            warn)
            *warn << "warning: test label '" << label << "' has no training file, ignored\n";
    return ds;
}

static std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// Sub-stream seed for (language, stream); stream 0 is the training text,
// stream 1+i is sentence i.
static std::uint64_t stream_seed(std::uint64_t seed, std::uint32_t lang, std::uint64_t stream) {
    return splitmix64(splitmix64(seed + 0x632be59bd9b4e019ull * (lang + 1)) + stream);
}

namespace {
struct SymbolSampler {
    std::array<std::uint32_t, hdc::kAlphabetSize> cumulative{};
    std::uint32_t total = 0;

    explicit SymbolSampler(std::uint32_t lang, std::uint32_t languages) {
        const std::uint32_t anchor = (lang * 26u) / languages;
        const std::uint32_t width = std::max(2u, 26u / languages);
        std::array<std::uint32_t, hdc::kAlphabetSize> weights{};
        // Letter weights follow a harmonic decay across the window. The skew
        // concentrates the n-gram profile the way natural text does, which
        // is what frequency-based recognition feeds on; a flat window would
        // spread the mass so thin that short sentences share almost no
        // n-grams with the training text. The per-language jitter keeps
        // distributions distinct even when two windows coincide.
        std::uint32_t letters = 0;
        for (std::uint32_t i = 0; i < width; ++i) {
            weights[(anchor + i) % 26] = 60u / (i + 1) +
                                         std::uint32_t(splitmix64(lang * 31u + i) % 4);
            letters += weights[(anchor + i) % 26];
        }
        weights[hdc::kSeparator] = letters / 5; // about one separator in six
        for (std::uint32_t s = 0; s < hdc::kAlphabetSize; ++s) {
            total += weights[s];
            cumulative[s] = total;
        }
    }

    Symbol draw(std::mt19937_64& gen) const {
        const std::uint32_t u = std::uint32_t(gen() % total);
        for (std::uint32_t s = 0; s < hdc::kAlphabetSize; ++s)
            if (u < cumulative[s]) return Symbol(s);
        return hdc::kSeparator; // unreachable
    }

    std::vector<Symbol> draw_text(std::uint64_t seed, std::uint32_t len) const {
        std::mt19937_64 gen(seed);
        std::vector<Symbol> text(len);
        for (auto& s : text) s = draw(gen);
        return text;
    }
};
} // namespace

Dataset synth_corpus(std::uint64_t seed, std::uint32_t languages, std::uint32_t train_len,
                     std::uint32_t sentences, std::uint32_t sentence_len) {
    if (languages == 0 || train_len == 0 || sentences == 0 || sentence_len == 0)
        throw ConfigError("synth_corpus: all counts must be positive");
    if (languages > 99) throw ConfigError("synth_corpus: at most 99 languages");
    Dataset ds;
    for (std::uint32_t l = 0; l < languages; ++l) {
        const SymbolSampler sampler(l, languages);
        Language lang;
        char buf[8];
        std::snprintf(buf, sizeof buf, "lang%02u", l + 1);
        lang.label = buf;
        lang.train = sampler.draw_text(stream_seed(seed, l, 0), train_len);
        lang.sentences.reserve(sentences);
        for (std::uint32_t s = 0; s < sentences; ++s)
            lang.sentences.push_back(sampler.draw_text(stream_seed(seed, l, 1 + s), sentence_len));
        ds.languages.push_back(std::move(lang));
    }
    return ds;
}

void write_dataset(const Dataset& ds, const std::filesystem::path& dir) {
    const auto train_dir = dir / "train";
    const auto test_dir = dir / "test";
    std::filesystem::create_directories(train_dir);
    std::filesystem::create_directories(test_dir);
    for (const auto& lang : ds.languages) {
        {
            std::ofstream out(train_dir / (lang.label + ".txt"), std::ios::binary);
            if (!out) throw ConfigError("cannot write training file for " + lang.label);
            out << render(lang.train);
        }
        std::ofstream out(test_dir / (lang.label + ".txt"), std::ios::binary);
        if (!out) throw ConfigError("cannot write test file for " + lang.label);
        for (const auto& s : lang.sentences) out << render(s) << '\n';
    }
}

} // namespace rthdc::corpus
