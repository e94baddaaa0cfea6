#pragma once

#include <stdexcept>
#include <string>

namespace aerialnav {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NoPathError : public Error {
public:
    using Error::Error;
};

class UnknownLabelError : public Error {
public:
    explicit UnknownLabelError(const std::string& label) : Error("unknown label: " + label), label_(label) {}
    const std::string& label() const { return label_; }

private:
    std::string label_;
};

class SchemaError : public Error {
public:
    SchemaError(std::string field_path, const std::string& what)
        : Error("schema error at '" + field_path + "': " + what), field_path_(std::move(field_path)) {}
    const std::string& field_path() const { return field_path_; }

private:
    std::string field_path_;
};

class GenerationFailure : public Error {
public:
    using Error::Error;
};

class EmptySetError : public Error {
public:
    EmptySetError() : Error("metric over an empty episode set") {}
};

class DegenerateStartError : public Error {
public:
    DegenerateStartError() : Error("initial distance to goal is zero; progress is undefined") {}
};

class PolicyError : public Error {
public:
    using Error::Error;
};

}  // namespace aerialnav
