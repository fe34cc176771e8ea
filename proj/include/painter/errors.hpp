// Copyright (C) 2026 The Painter Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace painter {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class EmptyMaskError : public Error {
public:
    using Error::Error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

class RangeError : public Error {
public:
    using Error::Error;
};

class ShapeError : public Error {
public:
    using Error::Error;
};

class SchemaError : public Error {
public:
    SchemaError(const std::string& message, std::string record_id = {})
        : Error(record_id.empty() ? message : "record '" + record_id + "': " + message),
          m_record_id(std::move(record_id)) {}

    const std::string& record_id() const noexcept { return m_record_id; }

private:
    std::string m_record_id;
};

class IoError : public Error {
public:
    using Error::Error;
};

class ClientError : public Error {
public:
    ClientError(const std::string& message, std::string record_id = {})
        : Error(record_id.empty() ? message : "record '" + record_id + "': " + message),
          m_record_id(std::move(record_id)) {}

    const std::string& record_id() const noexcept { return m_record_id; }

private:
    std::string m_record_id;
};

class EmptyPromptError : public Error {
public:
    using Error::Error;
};

class MissingTapError : public Error {
public:
    using Error::Error;
};

class ModelNotLoadedError : public Error {
public:
    using Error::Error;
};

}  // namespace painter
