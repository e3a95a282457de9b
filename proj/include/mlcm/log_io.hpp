#pragma once

#include "mlcm/session.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace mlcm {

// Session log format (UTF-8, LF, tab-separated; '#' starts a comment line):
//   session_id  query_id  region  docs  clicks
// where docs is ';'-joined "url|language|grade" in rank order (grade is one of
// Bad/Fair/Good/Excellent/Perfect/NA or an integer 0..4) and clicks is a
// ','-joined list of 1-based positions, empty when the session has no clicks.

/// Parses a session log. Throws ParseError (with the line number) on a
/// malformed line; duplicate session ids are allowed.
std::vector<Session> parse_session_log(std::istream& in);

std::vector<Session> load_session_log(const std::string& path);

void write_session_log(std::ostream& out, const std::vector<Session>& sessions);

void save_session_log(const std::string& path, const std::vector<Session>& sessions);

} // namespace mlcm
