#include "ems/tabular.hpp"

#include <cstdlib>
#include <sstream>

#include "ems/common.hpp"

namespace ems::tab {

const Section* Document::find(const std::string& name) const {
    for (const auto& s : sections)
        if (s.name == name) return &s;
    return nullptr;
}

Section& Document::add(const std::string& name) {
    sections.push_back(Section{name, {}});
    return sections.back();
}

Document parse(const std::string& text) {
    Document doc;
    Section* cur = nullptr;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
        // trim
        size_t b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos) continue;
        size_t e = line.find_last_not_of(" \t\r");
        std::string body = line.substr(b, e - b + 1);
        if (body.front() == '[') {
            if (body.back() != ']')
                throw Error(strfmt("line %d: malformed section header '%s'", lineno, body.c_str()));
            doc.sections.push_back(Section{body.substr(1, body.size() - 2), {}});
            cur = &doc.sections.back();
            continue;
        }
        if (!cur) throw Error(strfmt("line %d: record before any [section]", lineno));
        Record rec;
        rec.line = lineno;
        std::istringstream ls(body);
        std::string tok;
        while (ls >> tok) rec.fields.push_back(tok);
        cur->records.push_back(std::move(rec));
    }
    return doc;
}

std::string write(const Document& doc) {
    std::string out;
    for (const auto& s : doc.sections) {
        out += "[" + s.name + "]\n";
        for (const auto& r : s.records) {
            for (size_t i = 0; i < r.fields.size(); ++i) {
                if (i) out += ' ';
                out += r.fields[i];
            }
            out += '\n';
        }
    }
    return out;
}

static const std::string& field(const Record& r, size_t idx, const char* what) {
    if (idx >= r.fields.size())
        throw Error(strfmt("line %d: missing column %zu (%s)", r.line, idx + 1, what));
    return r.fields[idx];
}

double as_real(const Record& r, size_t idx, const char* what) {
    const std::string& s = field(r, idx, what);
    char* end = nullptr;
    double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size())
        throw Error(strfmt("line %d: '%s' is not a number (%s)", r.line, s.c_str(), what));
    return v;
}

long as_int(const Record& r, size_t idx, const char* what) {
    const std::string& s = field(r, idx, what);
    char* end = nullptr;
    long v = std::strtol(s.c_str(), &end, 10);
    if (end != s.c_str() + s.size())
        throw Error(strfmt("line %d: '%s' is not an integer (%s)", r.line, s.c_str(), what));
    return v;
}

const std::string& as_str(const Record& r, size_t idx, const char* what) {
    return field(r, idx, what);
}

bool as_flag(const Record& r, size_t idx, const char* what) {
    long v = as_int(r, idx, what);
    if (v != 0 && v != 1)
        throw Error(strfmt("line %d: flag must be 0 or 1 (%s)", r.line, what));
    return v == 1;
}

}  // namespace ems::tab
