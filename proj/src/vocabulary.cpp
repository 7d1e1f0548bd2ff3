#include "ssnb/vocabulary.hpp"

#include <algorithm>
#include <fstream>
#include <unordered_set>

#include "ssnb/errors.hpp"
#include "ssnb/rng.hpp"

namespace ssnb {

namespace {

// Append each not-yet-seen word once, in first-occurrence order.
template <typename CorpusT>
void collect_novel(const CorpusT& corpus, std::unordered_set<std::string>& seen,
                   std::vector<std::string>& out) {
    for (const Sentence& s : corpus.sentences) {
        for (const std::string& w : s.tokens) {
            if (seen.insert(w).second) out.push_back(w);
        }
    }
}

}  // namespace

OrderedWordPool build_word_pool(const LabeledCorpus& labeled_train, const LabeledCorpus& test,
                                const UnlabeledCorpus& unlabeled,
                                const std::vector<std::string>& fallback_wordlist, uint64_t seed) {
    std::unordered_set<std::string> seen;
    Rng rng(seed);

    std::vector<std::string> labeled_words;
    collect_novel(labeled_train, seen, labeled_words);
    collect_novel(test, seen, labeled_words);
    rng.shuffle(labeled_words);

    std::vector<std::string> unlabeled_words;
    collect_novel(unlabeled, seen, unlabeled_words);
    rng.shuffle(unlabeled_words);

    OrderedWordPool pool;
    pool.words = std::move(labeled_words);
    pool.labeled_end = pool.words.size();
    pool.words.insert(pool.words.end(), unlabeled_words.begin(), unlabeled_words.end());
    pool.unlabeled_end = pool.words.size();
    for (const std::string& w : fallback_wordlist) {
        if (seen.insert(w).second) pool.words.push_back(w);
    }
    return pool;
}

Vocabulary Vocabulary::from_words(std::vector<std::string> words) {
    Vocabulary vocab;
    vocab.words = std::move(words);
    vocab.index.reserve(vocab.words.size());
    for (uint32_t i = 0; i < vocab.words.size(); ++i) {
        auto [it, inserted] = vocab.index.emplace(vocab.words[i], i);
        if (!inserted) throw validation_error("duplicate word in vocabulary: " + vocab.words[i]);
    }
    return vocab;
}

Vocabulary truncate(const OrderedWordPool& pool, uint32_t vocab_size) {
    if (vocab_size > pool.size()) {
        throw validation_error("requested vocabulary size " + std::to_string(vocab_size) +
                               " exceeds the word pool (" + std::to_string(pool.size()) +
                               " words); supply a larger fallback wordlist");
    }
    return Vocabulary::from_words(
        std::vector<std::string>(pool.words.begin(), pool.words.begin() + vocab_size));
}

TermCounts vectorize(const Sentence& sentence, const Vocabulary& vocab) {
    // Token streams are short; gather then sort beats a map here.
    std::vector<uint32_t> ids;
    ids.reserve(sentence.tokens.size());
    for (const std::string& tok : sentence.tokens) {
        auto it = vocab.index.find(tok);
        if (it != vocab.index.end()) ids.push_back(it->second);
    }
    std::sort(ids.begin(), ids.end());

    TermCounts counts;
    for (size_t i = 0; i < ids.size();) {
        size_t j = i;
        while (j < ids.size() && ids[j] == ids[i]) ++j;
        counts.entries.emplace_back(ids[i], static_cast<uint32_t>(j - i));
        i = j;
    }
    return counts;
}

std::vector<uint32_t> vectorize_dense(const Sentence& sentence, const Vocabulary& vocab) {
    std::vector<uint32_t> dense(vocab.size(), 0);
    for (auto [w, c] : vectorize(sentence, vocab).entries) dense[w] = c;
    return dense;
}

VectorizedLabeled vectorize_corpus(const LabeledCorpus& corpus, const Vocabulary& vocab) {
    VectorizedLabeled out;
    out.class_names = corpus.class_names;
    out.vocab_size = vocab.size();
    out.docs.reserve(corpus.size());
    out.labels.reserve(corpus.size());
    for (const Sentence& s : corpus.sentences) {
        if (!s.label || *s.label < 0 || *s.label >= corpus.num_classes()) {
            throw validation_error("unlabeled or out-of-range sentence in labeled corpus: " + s.id);
        }
        out.docs.push_back(vectorize(s, vocab));
        out.labels.push_back(*s.label);
    }
    return out;
}

VectorizedUnlabeled vectorize_corpus(const UnlabeledCorpus& corpus, const Vocabulary& vocab) {
    VectorizedUnlabeled out;
    out.vocab_size = vocab.size();
    out.docs.reserve(corpus.size());
    for (const Sentence& s : corpus.sentences) out.docs.push_back(vectorize(s, vocab));
    return out;
}

std::vector<std::string> load_wordlist(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open wordlist: " + path.string());
    std::vector<std::string> words;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) words.push_back(line);
    }
    return words;
}

std::vector<std::string> synthetic_wordlist(size_t count, const std::string& prefix) {
    // Base-26 suffixes, fixed width so every word is purely alphabetic and
    // survives tokenization unchanged.
    size_t width = 1;
    size_t span = 26;
    while (span < count) {
        ++width;
        span *= 26;
    }
    if (width < 3) width = 3;
    std::vector<std::string> words;
    words.reserve(count);
    for (size_t i = 0; i < count; ++i) {
        std::string suffix(width, 'a');
        size_t x = i;
        for (size_t pos = width; pos-- > 0 && x > 0; x /= 26) {
            suffix[pos] = static_cast<char>('a' + x % 26);
        }
        words.push_back(prefix + suffix);
    }
    return words;
}

}  // namespace ssnb
