#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sfh/field.hpp"
#include "sfh/sampler.hpp"

namespace sfh::io {

// FNV-1a 64-bit checksum of a file's bytes.
std::uint64_t fnv1a64_file(const std::string& path);

// Columnar coefficient dump: replicate,l,m,t,re,im (one row per
// l, m >= 0, time index, replicate).
void write_coefficients_csv(const std::string& path,
                            const std::vector<sampler::CoefficientPathSet>& sets);

// t,colatitude,longitude,value rows.
void write_field_csv(const std::string& path, const field::FieldSample& sample);

// Compact binary layout (documented in the README): magic "SFHB", version,
// dimensions, time grid, points, then row-major values, all little-endian.
void write_field_binary(const std::string& path, const field::FieldSample& sample);

// Two-column (or more) numeric CSV with a header line.
void write_table_csv(const std::string& path, const std::vector<std::string>& header,
                     const std::vector<std::vector<double>>& columns);

} // namespace sfh::io
