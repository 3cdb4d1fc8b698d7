#include "hmtl/ingest/corpus_io.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>

#include "hmtl/errors.hpp"

namespace hmtl::ingest {
namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
    std::vector<std::string_view> cols;
    std::size_t start = 0;
    while (true) {
        const std::size_t tab = line.find('\t', start);
        if (tab == std::string_view::npos) {
            cols.push_back(line.substr(start));
            return cols;
        }
        cols.push_back(line.substr(start, tab - start));
        start = tab + 1;
    }
}

bool is_blank(std::string_view line) {
    return line.find_first_not_of(" \t") == std::string_view::npos;
}

std::optional<int> parse_int(std::string_view text) {
    int value = 0;
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || ptr != end) return std::nullopt;
    return value;
}

std::ifstream open_or_throw(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot open " + path);
    }
    return in;
}

// Accumulates the token lines of one CoNLL-U sentence.
struct ConlluBlock {
    std::string sent_id;
    std::vector<std::string> words, xpos, heads, deprels;
    std::size_t first_line = 0;

    bool empty() const { return words.empty(); }
};

Sentence finish_block(ConlluBlock& block, const std::string& source, std::size_t ordinal) {
    std::string id = block.sent_id.empty() ? source + "-" + std::to_string(ordinal)
                                           : block.sent_id;
    Sentence s = make_sentence(std::move(id), std::move(block.words), std::move(block.xpos));
    std::size_t underscores = 0;
    for (const auto& h : block.heads) {
        if (h == "_") ++underscores;
    }
    if (underscores != 0 && underscores != block.heads.size()) {
        throw ParseError(source, block.first_line, "HEAD column mixes '_' and indices");
    }
    if (underscores == 0) {
        std::vector<int> heads;
        for (const auto& h : block.heads) heads.push_back(*parse_int(h));
        s.gold_heads = std::move(heads);
        s.gold_deprels = std::move(block.deprels);
    }
    validate(s);
    block = ConlluBlock{};
    return s;
}

}  // namespace

std::string source_name(const std::string& path) {
    return std::filesystem::path(path).stem().string();
}

std::vector<Sentence> parse_conllu(std::istream& in, const std::string& source) {
    std::vector<Sentence> out;
    ConlluBlock block;
    std::string line;
    std::size_t lineno = 0;
    auto flush = [&] {
        if (!block.empty()) out.push_back(finish_block(block, source, out.size() + 1));
        block = ConlluBlock{};
    };
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (is_blank(line)) {
            flush();
            continue;
        }
        if (line.front() == '#') {
            constexpr std::string_view kSentId = "# sent_id =";
            if (line.starts_with(kSentId)) {
                std::string_view rest = std::string_view(line).substr(kSentId.size());
                const auto b = rest.find_first_not_of(' ');
                block.sent_id = b == std::string_view::npos ? "" : std::string(rest.substr(b));
            }
            continue;
        }
        const auto cols = split_tabs(line);
        if (cols.size() != 10) {
            throw ParseError(source, lineno,
                             "expected 10 tab-separated columns, found " + std::to_string(cols.size()));
        }
        const std::string_view id = cols[0];
        if (id.find('-') != std::string_view::npos || id.find('.') != std::string_view::npos) {
            continue;
        }
        const auto index = parse_int(id);
        if (!index || *index != static_cast<int>(block.words.size() + 1)) {
            throw ParseError(source, lineno, "unexpected token id '" + std::string(id) + "'");
        }
        if (cols[6] != "_" && !parse_int(cols[6])) {
            throw ParseError(source, lineno, "non-integer HEAD '" + std::string(cols[6]) + "'");
        }
        if (block.empty()) block.first_line = lineno;
        block.words.emplace_back(cols[1]);
        block.xpos.emplace_back(cols[4]);
        block.heads.emplace_back(cols[6]);
        block.deprels.emplace_back(cols[7]);
    }
    flush();
    return out;
}

std::vector<Sentence> read_conllu(const std::string& path) {
    auto in = open_or_throw(path);
    return parse_conllu(in, source_name(path));
}

std::vector<Sentence> parse_ner(std::istream& in, const std::string& source) {
    std::vector<Sentence> out;
    std::vector<std::string> words, xpos, tags;
    auto flush = [&] {
        if (words.empty()) return;
        Sentence s = make_sentence(source + "-" + std::to_string(out.size() + 1), std::move(words),
                                   std::move(xpos));
        s.gold_ner = std::move(tags);
        validate(s);
        out.push_back(std::move(s));
        words.clear();
        xpos.clear();
        tags.clear();
    };
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (is_blank(line)) {
            flush();
            continue;
        }
        const auto cols = split_tabs(line);
        if (cols.size() != 3) {
            throw ParseError(source, lineno,
                             "expected FORM, XPOS and NERTAG columns, found " +
                                 std::to_string(cols.size()));
        }
        if (cols[0].empty()) {
            throw ParseError(source, lineno, "empty FORM");
        }
        words.emplace_back(cols[0]);
        xpos.emplace_back(cols[1]);
        tags.emplace_back(cols[2]);
    }
    flush();
    return out;
}

std::vector<Sentence> read_ner(const std::string& path) {
    auto in = open_or_throw(path);
    return parse_ner(in, source_name(path));
}

void write_conllu(std::ostream& out, const std::vector<Sentence>& sentences) {
    for (const Sentence& s : sentences) {
        out << "# sent_id = " << s.id << '\n';
        for (std::size_t i = 0; i < s.size(); ++i) {
            out << (i + 1) << '\t' << s.words[i] << "\t_\t_\t" << s.xpos[i] << "\t_\t";
            if (s.gold_heads) {
                out << (*s.gold_heads)[i];
            } else {
                out << '_';
            }
            out << '\t' << (s.gold_deprels ? (*s.gold_deprels)[i] : std::string("_")) << "\t_\t_\n";
        }
        out << '\n';
    }
}

void write_ner(std::ostream& out, const std::vector<Sentence>& sentences,
               const std::vector<std::vector<std::string>>* predicted) {
    if (predicted != nullptr && predicted->size() != sentences.size()) {
        throw ContractError("write_ner: prediction count differs from sentence count");
    }
    for (std::size_t k = 0; k < sentences.size(); ++k) {
        const Sentence& s = sentences[k];
        if (predicted != nullptr && (*predicted)[k].size() != s.size()) {
            throw ContractError("write_ner: prediction length differs for sentence " + s.id);
        }
        for (std::size_t i = 0; i < s.size(); ++i) {
            out << s.words[i] << '\t' << s.xpos[i] << '\t'
                << (s.gold_ner ? (*s.gold_ner)[i] : std::string("_"));
            if (predicted != nullptr) out << '\t' << (*predicted)[k][i];
            out << '\n';
        }
        out << '\n';
    }
}

}  // namespace hmtl::ingest
