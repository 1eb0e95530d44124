#pragma once

#include <array>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "errors.hpp"
#include "matrix.hpp"

// Matrix file formats.
//
// CSV: one matrix row per line, entries separated by commas, decimal text.
// Numbers are written in shortest round-trip form, so write/read is exact and
// output bytes depend only on the values.
//
// Binary: 8-byte little-endian unsigned rows, 8-byte little-endian unsigned
// cols, then rows*cols IEEE-754 binary64 values in row-major order, each
// little-endian. No padding, no trailer.
namespace pairsketch::io {

inline std::string format_double(double v)
{
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    if (ec != std::errc()) throw io_error("format_double: conversion failed");
    return std::string(buf.data(), ptr);
}

inline std::string to_csv(const DenseMatrix& a)
{
    std::string out;
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) {
            if (j) out += ',';
            out += format_double(a(i, j));
        }
        out += '\n';
    }
    return out;
}

inline DenseMatrix parse_csv(std::string_view text)
{
    std::vector<double> values;
    std::size_t rows = 0, cols = 0;
    std::size_t line_no = 0;
    while (!text.empty()) {
        const auto eol = text.find('\n');
        std::string_view line = text.substr(0, eol);
        text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.find_first_not_of(" \t") == std::string_view::npos) continue;

        std::size_t count = 0;
        while (true) {
            const auto comma = line.find(',');
            std::string_view field = line.substr(0, comma);
            const auto b = field.find_first_not_of(" \t");
            const auto e = field.find_last_not_of(" \t");
            if (b == std::string_view::npos) {
                throw io_error("csv line " + std::to_string(line_no) + ": empty field");
            }
            field = field.substr(b, e - b + 1);
            double v = 0.0;
            const char* first = field.data();
            if (*first == '+') ++first;
            auto [ptr, ec] = std::from_chars(first, field.data() + field.size(), v);
            if (ec != std::errc() || ptr != field.data() + field.size()) {
                throw io_error("csv line " + std::to_string(line_no) + ": bad number '" + std::string(field) + "'");
            }
            values.push_back(v);
            ++count;
            if (comma == std::string_view::npos) break;
            line = line.substr(comma + 1);
        }
        if (rows == 0) {
            cols = count;
        } else if (count != cols) {
            throw io_error("csv line " + std::to_string(line_no) + ": expected " + std::to_string(cols) +
                           " fields, got " + std::to_string(count));
        }
        ++rows;
    }
    if (rows == 0) throw io_error("csv: no data");
    try {
        return DenseMatrix(rows, cols, std::move(values));
    } catch (const std::invalid_argument& e) {
        throw io_error(std::string("csv: ") + e.what());
    }
}

namespace detail {

inline void put_u64(std::string& out, std::uint64_t v)
{
    for (int i = 0; i < 8; ++i) out += static_cast<char>((v >> (8 * i)) & 0xFF);
}

inline std::uint64_t get_u64(std::string_view in, std::size_t offset)
{
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[offset + i])) << (8 * i);
    return v;
}

} // namespace detail

inline std::string to_binary(const DenseMatrix& a)
{
    std::string out;
    out.reserve(16 + 8 * a.size());
    detail::put_u64(out, a.rows());
    detail::put_u64(out, a.cols());
    for (double v : a.values()) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, sizeof bits);
        detail::put_u64(out, bits);
    }
    return out;
}

inline DenseMatrix parse_binary(std::string_view in)
{
    if (in.size() < 16) throw io_error("binary matrix: truncated header");
    const std::uint64_t rows = detail::get_u64(in, 0);
    const std::uint64_t cols = detail::get_u64(in, 8);
    if (rows == 0 || cols == 0 || rows > (in.size() / 8) || cols > (in.size() / 8) ||
        in.size() != 16 + 8 * rows * cols) {
        throw io_error("binary matrix: payload size does not match header");
    }
    std::vector<double> values(rows * cols);
    for (std::size_t i = 0; i < values.size(); ++i) {
        const std::uint64_t bits = detail::get_u64(in, 16 + 8 * i);
        std::memcpy(&values[i], &bits, sizeof bits);
    }
    try {
        return DenseMatrix(rows, cols, std::move(values));
    } catch (const std::invalid_argument& e) {
        throw io_error(std::string("binary matrix: ") + e.what());
    }
}

inline std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::filesystem::path& path, std::string_view content)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw io_error("cannot write " + path.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw io_error("write failed: " + path.string());
}

/// Loads a matrix; files ending in `.bin` use the binary layout, anything
/// else is parsed as CSV.
inline DenseMatrix load_matrix(const std::filesystem::path& path)
{
    const auto content = read_file(path);
    return path.extension() == ".bin" ? parse_binary(content) : parse_csv(content);
}

inline void save_matrix(const std::filesystem::path& path, const DenseMatrix& a)
{
    write_file(path, path.extension() == ".bin" ? to_binary(a) : to_csv(a));
}

} // namespace pairsketch::io
