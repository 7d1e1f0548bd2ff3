#include "ssnb/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "ssnb/errors.hpp"
#include "ssnb/rng.hpp"

namespace ssnb {

using nlohmann::json;

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    for (char ch : text) {
        if (ch >= 'a' && ch <= 'z') {
            current.push_back(ch);
        } else if (ch >= 'A' && ch <= 'Z') {
            current.push_back(static_cast<char>(ch - 'A' + 'a'));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

namespace {

json parse_line(const std::string& line, const std::filesystem::path& path, size_t line_no) {
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        throw validation_error(path.string() + ":" + std::to_string(line_no) +
                               ": malformed JSONL record");
    }
    return j;
}

Sentence parse_record(const json& j, const std::filesystem::path& path, size_t line_no) {
    if (!j.contains("id") || !j.at("id").is_string() || !j.contains("text") ||
        !j.at("text").is_string()) {
        throw validation_error(path.string() + ":" + std::to_string(line_no) +
                               ": record needs string \"id\" and \"text\" fields");
    }
    Sentence s;
    s.id = j.at("id").get<std::string>();
    s.tokens = tokenize(j.at("text").get<std::string>());
    return s;
}

}  // namespace

LabeledCorpus load_labeled_corpus(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open corpus file: " + path.string());

    LabeledCorpus corpus;
    std::string line;
    size_t line_no = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j = parse_line(line, path, line_no);
        if (!have_header) {
            if (!j.contains("classes") || !j.at("classes").is_array()) {
                throw validation_error(path.string() + ":" + std::to_string(line_no) +
                                       ": labeled corpus must start with a {\"classes\": [...]} header");
            }
            for (const auto& c : j.at("classes")) {
                if (!c.is_string()) {
                    throw validation_error(path.string() + ":" + std::to_string(line_no) +
                                           ": class names must be strings");
                }
                corpus.class_names.push_back(c.get<std::string>());
            }
            have_header = true;
            continue;
        }
        Sentence s = parse_record(j, path, line_no);
        if (!j.contains("label") || !j.at("label").is_string()) {
            throw validation_error(path.string() + ":" + std::to_string(line_no) +
                                   ": labeled record is missing a string \"label\"");
        }
        const std::string label = j.at("label").get<std::string>();
        auto it = std::find(corpus.class_names.begin(), corpus.class_names.end(), label);
        if (it == corpus.class_names.end()) {
            throw validation_error(path.string() + ":" + std::to_string(line_no) + ": label \"" +
                                   label + "\" is not in the class set");
        }
        s.label = static_cast<int>(it - corpus.class_names.begin());
        corpus.sentences.push_back(std::move(s));
    }
    if (!have_header) {
        throw validation_error(path.string() + ": labeled corpus is missing the class header");
    }
    return corpus;
}

UnlabeledCorpus load_unlabeled_corpus(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open corpus file: " + path.string());

    UnlabeledCorpus corpus;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j = parse_line(line, path, line_no);
        if (j.contains("label")) {
            throw validation_error(path.string() + ":" + std::to_string(line_no) +
                                   ": labeled record in an unlabeled corpus");
        }
        if (j.contains("classes")) {
            throw validation_error(path.string() + ":" + std::to_string(line_no) +
                                   ": class header in an unlabeled corpus");
        }
        corpus.sentences.push_back(parse_record(j, path, line_no));
    }
    return corpus;
}

namespace {

std::string join_tokens(const std::vector<std::string>& tokens) {
    std::string text;
    for (size_t i = 0; i < tokens.size(); ++i) {
        if (i) text.push_back(' ');
        text += tokens[i];
    }
    return text;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);  // LF line endings everywhere
    if (!out) throw io_error("cannot write corpus file: " + path.string());
    return out;
}

}  // namespace

void save_labeled_corpus(const LabeledCorpus& corpus, const std::filesystem::path& path) {
    auto out = open_out(path);
    json header;
    header["classes"] = corpus.class_names;
    out << header.dump() << "\n";
    for (const Sentence& s : corpus.sentences) {
        if (!s.label || *s.label < 0 || *s.label >= corpus.num_classes()) {
            throw validation_error("sentence " + s.id + " has no valid label");
        }
        json j;
        j["id"] = s.id;
        j["text"] = join_tokens(s.tokens);
        j["label"] = corpus.class_names[static_cast<size_t>(*s.label)];
        out << j.dump() << "\n";
    }
    if (!out) throw io_error("write failed: " + path.string());
}

void save_unlabeled_corpus(const UnlabeledCorpus& corpus, const std::filesystem::path& path) {
    auto out = open_out(path);
    for (const Sentence& s : corpus.sentences) {
        json j;
        j["id"] = s.id;
        j["text"] = join_tokens(s.tokens);
        out << j.dump() << "\n";
    }
    if (!out) throw io_error("write failed: " + path.string());
}

std::pair<LabeledCorpus, LabeledCorpus> split(const LabeledCorpus& corpus, double test_fraction,
                                              uint64_t seed) {
    if (test_fraction < 0.0 || test_fraction > 1.0) {
        throw validation_error("test_fraction must lie in [0, 1]");
    }
    const size_t n = corpus.size();
    const size_t n_test =
        static_cast<size_t>(std::llround(test_fraction * static_cast<double>(n)));

    std::vector<size_t> order(n);
    for (size_t i = 0; i < n; ++i) order[i] = i;
    Rng rng(seed);
    rng.shuffle(order);

    std::vector<bool> in_test(n, false);
    for (size_t i = 0; i < n_test; ++i) in_test[order[i]] = true;

    LabeledCorpus train, test;
    train.class_names = corpus.class_names;
    test.class_names = corpus.class_names;
    for (size_t i = 0; i < n; ++i) {
        (in_test[i] ? test : train).sentences.push_back(corpus.sentences[i]);
    }
    return {std::move(train), std::move(test)};
}

LabeledCorpus concat(const LabeledCorpus& a, const LabeledCorpus& b) {
    if (!b.class_names.empty() && a.class_names != b.class_names) {
        throw validation_error("cannot concatenate corpora with different class sets");
    }
    LabeledCorpus out = a;
    out.sentences.insert(out.sentences.end(), b.sentences.begin(), b.sentences.end());
    return out;
}

}  // namespace ssnb
