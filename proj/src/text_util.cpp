#include "tiersim/text_util.hpp"

#include "tiersim/types.hpp"

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace tiersim {

std::string fmt_double(double v, int precision) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    return buf;
}

std::string fmt_fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

std::string fmt_double_rt(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::vector<std::string> split_ws(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream is(line);
    std::string tok;
    while (is >> tok) out.push_back(tok);
    return out;
}

std::vector<std::string> split_char(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

namespace {
std::string at(const std::string& where, const std::string& key) {
    return where.empty() ? key : where + ": " + key;
}
} // namespace

const std::string& KvPairs::get(const std::string& k) const {
    auto it = kv.find(k);
    if (it == kv.end()) throw ParseError(at(where, "missing key '" + k + "'"));
    return it->second;
}

std::string KvPairs::get_or(const std::string& k, const std::string& dflt) const {
    auto it = kv.find(k);
    return it == kv.end() ? dflt : it->second;
}

double KvPairs::get_double(const std::string& k) const { return parse_double(get(k), at(where, k)); }

double KvPairs::get_double_or(const std::string& k, double dflt) const {
    auto it = kv.find(k);
    return it == kv.end() ? dflt : parse_double(it->second, at(where, k));
}

std::uint64_t KvPairs::get_u64(const std::string& k) const { return parse_u64(get(k), at(where, k)); }

std::uint64_t KvPairs::get_u64_or(const std::string& k, std::uint64_t dflt) const {
    auto it = kv.find(k);
    return it == kv.end() ? dflt : parse_u64(it->second, at(where, k));
}

bool KvPairs::get_bool_or(const std::string& k, bool dflt) const {
    auto it = kv.find(k);
    if (it == kv.end()) return dflt;
    const std::string& v = it->second;
    if (v == "1" || v == "true" || v == "yes") return true;
    if (v == "0" || v == "false" || v == "no") return false;
    throw ParseError(at(where, "bad boolean for '" + k + "': " + v));
}

KvPairs parse_kv(const std::vector<std::string>& tokens, std::size_t first,
                 const std::string& where) {
    KvPairs out;
    out.where = where;
    for (std::size_t i = first; i < tokens.size(); ++i) {
        auto pos = tokens[i].find('=');
        if (pos == std::string::npos || pos == 0)
            throw ParseError(where + ": expected key=value, got '" + tokens[i] + "'");
        out.kv[tokens[i].substr(0, pos)] = tokens[i].substr(pos + 1);
    }
    return out;
}

double parse_double(const std::string& s, const std::string& where) {
    char* end = nullptr;
    double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0')
        throw ParseError(where + ": bad number '" + s + "'");
    return v;
}

std::uint64_t parse_u64(const std::string& s, const std::string& where) {
    char* end = nullptr;
    unsigned long long v = std::strtoull(s.c_str(), &end, 10);
    if (end == s.c_str() || *end != '\0')
        throw ParseError(where + ": bad integer '" + s + "'");
    return v;
}

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ParseError("cannot open " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw RunError("cannot write " + path);
    f << content;
}

} // namespace tiersim
