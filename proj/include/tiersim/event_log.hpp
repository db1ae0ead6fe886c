#pragma once

#include <cstdint>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace tiersim {

// Structured line-oriented run log. Records carry simulated time only, so two runs
// of the same seed produce byte-identical logs.
class EventLog {
public:
    class Record {
    public:
        Record(EventLog* log, const char* kind, std::uint64_t epoch) : log_(log) {
            os_ << kind << " epoch=" << epoch;
        }
        ~Record() {
            if (log_) log_->append(os_.str());
        }
        Record(const Record&) = delete;
        Record& operator=(const Record&) = delete;
        Record(Record&& o) noexcept : log_(o.log_), os_(std::move(o.os_)) { o.log_ = nullptr; }

        // Values must stay single-token for the one-line k=v format, so any
        // whitespace in free text (warning messages) is flattened to '_'.
        template <typename T>
        Record& field(const char* key, const T& value) {
            std::ostringstream vs;
            vs << value;
            std::string s = vs.str();
            for (char& c : s)
                if (c == ' ' || c == '\t' || c == '\n' || c == '\r') c = '_';
            os_ << ' ' << key << '=' << s;
            return *this;
        }

    private:
        EventLog* log_;
        std::ostringstream os_;
    };

    Record record(const char* kind, std::uint64_t epoch) { return Record(this, kind, epoch); }
    void line(const std::string& s) { append(s); }

    const std::string& text() const { return text_; }
    void clear() { text_.clear(); }

private:
    void append(const std::string& s) {
        text_ += s;
        text_ += '\n';
    }
    std::string text_;
};

// Read side of the log format: one record per line, "kind k=v k=v ...".
struct Event {
    std::string kind;
    std::uint64_t epoch = 0;
    std::map<std::string, std::string> fields;
};

Event parse_event_line(const std::string& line);
std::vector<Event> parse_event_log(const std::string& text, const std::string& kind_filter = "");

} // namespace tiersim
