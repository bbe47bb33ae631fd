#pragma once

#include <stdexcept>
#include <string>

namespace aeval {

// A manifest, score file, or in-memory object breaks one of the documented
// rules. The message names the offending entity (video_id or file) and the
// rule it violated.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A metric cannot be computed from the supplied data (e.g. no accident
// videos, no negative samples).
class EvalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// OS-level file input/output failure.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace aeval
