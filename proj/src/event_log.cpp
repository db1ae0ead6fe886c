#include "tiersim/event_log.hpp"

#include "tiersim/text_util.hpp"
#include "tiersim/types.hpp"

namespace tiersim {

Event parse_event_line(const std::string& line) {
    auto tok = split_ws(line);
    if (tok.empty()) throw ParseError("empty event line");
    Event ev;
    ev.kind = tok[0];
    for (std::size_t i = 1; i < tok.size(); ++i) {
        auto eq = tok[i].find('=');
        if (eq == std::string::npos || eq == 0)
            throw ParseError("malformed event field '" + tok[i] + "'");
        ev.fields[tok[i].substr(0, eq)] = tok[i].substr(eq + 1);
    }
    if (auto it = ev.fields.find("epoch"); it != ev.fields.end())
        ev.epoch = parse_u64(it->second, "event line");
    return ev;
}

std::vector<Event> parse_event_log(const std::string& text, const std::string& kind_filter) {
    std::vector<Event> out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        Event ev = parse_event_line(line);
        if (kind_filter.empty() || ev.kind == kind_filter) out.push_back(std::move(ev));
    }
    return out;
}

} // namespace tiersim
