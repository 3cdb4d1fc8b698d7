#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "hmtl/ingest/sentence.hpp"

namespace hmtl::ingest {

// CoNLL-U: FORM, XPOS, HEAD and DEPREL are read; LEMMA, UPOS, FEATS, DEPS
// and MISC are ignored. Comments, multiword ranges ("3-4") and empty nodes
// ("3.1") are skipped. A "# sent_id = X" comment names the sentence;
// otherwise ids are "<source>-<k>". A sentence whose HEAD column is all "_"
// carries no gold tree.
std::vector<Sentence> parse_conllu(std::istream& in, const std::string& source);
std::vector<Sentence> read_conllu(const std::string& path);

// NER corpus: FORM \t XPOS \t NERTAG per line, blank line between sentences.
std::vector<Sentence> parse_ner(std::istream& in, const std::string& source);
std::vector<Sentence> read_ner(const std::string& path);

// Writes HEAD/DEPREL from gold_heads/gold_deprels ("_" when absent).
void write_conllu(std::ostream& out, const std::vector<Sentence>& sentences);

// Writes FORM, XPOS, gold tag ("_" when absent) and, when given, a fourth
// column with the predicted tag.
void write_ner(std::ostream& out, const std::vector<Sentence>& sentences,
               const std::vector<std::vector<std::string>>* predicted = nullptr);

// Stem of a path without directories and extension; used for default ids.
std::string source_name(const std::string& path);

}  // namespace hmtl::ingest
