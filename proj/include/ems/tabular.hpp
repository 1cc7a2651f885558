#pragma once

#include <deque>
#include <string>
#include <vector>

namespace ems::tab {

// Section-based tabular text format shared by case files, factor dumps and
// reports. A document is a sequence of `[section]` headers, each followed by
// whitespace-separated records, one per line. `#` starts a comment.

struct Record {
    int line = 0;  // 1-based source line, 0 when built programmatically
    std::vector<std::string> fields;
};

struct Section {
    std::string name;
    std::vector<Record> records;
};

struct Document {
    std::deque<Section> sections;  // deque: add() hands out stable references

    const Section* find(const std::string& name) const;
    Section& add(const std::string& name);
};

Document parse(const std::string& text);
std::string write(const Document& doc);

// Field accessors; all throw ems::Error with the record's line number.
double as_real(const Record& r, size_t idx, const char* what);
long as_int(const Record& r, size_t idx, const char* what);
const std::string& as_str(const Record& r, size_t idx, const char* what);
bool as_flag(const Record& r, size_t idx, const char* what);

}  // namespace ems::tab
