#pragma once

#include <stdexcept>
#include <string>

namespace splathand {

// Input data violates a documented invariant (bad rotation, negative scale, ...).
struct ValidationError : std::runtime_error {
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Mismatched shapes / incompatible inputs.
struct StructuralError : std::runtime_error {
    explicit StructuralError(const std::string& msg) : std::runtime_error(msg) {}
};

// A mesh face too degenerate to carry a frame. Carries the face id.
struct DegenerateFaceError : std::runtime_error {
    DegenerateFaceError(int face, const std::string& msg)
        : std::runtime_error("face " + std::to_string(face) + ": " + msg), face_index(face) {}
    int face_index;
};

// Malformed file contents.
struct FormatError : std::runtime_error {
    explicit FormatError(const std::string& msg) : std::runtime_error(msg) {}
};

// Filesystem-level failure (missing file, unwritable path).
struct IoError : std::runtime_error {
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace splathand
