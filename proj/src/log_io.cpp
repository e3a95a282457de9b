#include "mlcm/log_io.hpp"

#include "mlcm/error.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace mlcm {

namespace {

std::vector<std::string_view> split(std::string_view text, char sep) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = text.find(sep, start);
        if (pos == std::string_view::npos) {
            parts.push_back(text.substr(start));
            return parts;
        }
        parts.push_back(text.substr(start, pos - start));
        start = pos + 1;
    }
}

int parse_position(std::string_view token, int line_no) {
    int value = 0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc() || ptr != token.data() + token.size())
        throw ParseError(line_no, "non-integer click position '" + std::string(token) + "'");
    return value;
}

Session parse_line(std::string_view line, int line_no) {
    const auto fields = split(line, '\t');
    if (fields.size() != 5)
        throw ParseError(line_no, "expected 5 tab-separated fields, got " +
                                      std::to_string(fields.size()));

    Session s;
    s.session_id = std::string(fields[0]);
    s.query_id = std::string(fields[1]);
    s.region = std::string(fields[2]);

    if (fields[3].empty()) throw ParseError(line_no, "empty docs field");
    for (std::string_view entry : split(fields[3], ';')) {
        const auto parts = split(entry, '|');
        if (parts.size() != 3)
            throw ParseError(line_no, "doc entry '" + std::string(entry) +
                                          "' is not url|language|grade");
        RankedDoc doc;
        doc.url = std::string(parts[0]);
        doc.language = std::string(parts[1]);
        if (doc.url.empty()) throw ParseError(line_no, "empty url");
        if (doc.language.empty()) throw ParseError(line_no, "empty language");
        if (parts[2] != "NA") {
            const auto grade = grade_from_token(parts[2]);
            if (!grade)
                throw ParseError(line_no, "unknown grade token '" + std::string(parts[2]) + "'");
            doc.grade = *grade;
        }
        s.docs.push_back(std::move(doc));
    }

    if (!fields[4].empty()) {
        for (std::string_view token : split(fields[4], ',')) {
            const int pos = parse_position(token, line_no);
            if (pos < 1 || pos > static_cast<int>(s.docs.size()))
                throw ParseError(line_no, "click position " + std::to_string(pos) +
                                              " out of range 1.." +
                                              std::to_string(s.docs.size()));
            s.clicks.push_back(pos);
        }
        std::sort(s.clicks.begin(), s.clicks.end());
        s.clicks.erase(std::unique(s.clicks.begin(), s.clicks.end()), s.clicks.end());
    }
    return s;
}

} // namespace

std::vector<Session> parse_session_log(std::istream& in) {
    std::vector<Session> sessions;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        sessions.push_back(parse_line(line, line_no));
    }
    return sessions;
}

std::vector<Session> load_session_log(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open session log: " + path);
    return parse_session_log(in);
}

void write_session_log(std::ostream& out, const std::vector<Session>& sessions) {
    for (const Session& s : sessions) {
        out << s.session_id << '\t' << s.query_id << '\t' << s.region << '\t';
        for (std::size_t i = 0; i < s.docs.size(); ++i) {
            const RankedDoc& d = s.docs[i];
            if (i) out << ';';
            out << d.url << '|' << d.language << '|'
                << (d.grade ? to_string(*d.grade) : std::string("NA"));
        }
        out << '\t';
        for (std::size_t i = 0; i < s.clicks.size(); ++i) {
            if (i) out << ',';
            out << s.clicks[i];
        }
        out << '\n';
    }
}

void save_session_log(const std::string& path, const std::vector<Session>& sessions) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write session log: " + path);
    write_session_log(out, sessions);
}

} // namespace mlcm
