#include "sfh/io.hpp"

#include <cstdarg>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "sfh/errors.hpp"

namespace sfh::io {

std::uint64_t fnv1a64_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for checksum: " + path);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char buf[1 << 16];
    while (in) {
        in.read(buf, sizeof(buf));
        const std::streamsize got = in.gcount();
        for (std::streamsize i = 0; i < got; ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ULL;
        }
    }
    return h;
}

namespace {

class Writer {
public:
    explicit Writer(const std::string& path) : f_(std::fopen(path.c_str(), "wb")), path_(path) {
        if (!f_) throw std::runtime_error("cannot open for writing: " + path);
    }
    ~Writer() {
        if (f_) std::fclose(f_);
    }
    Writer(const Writer&) = delete;
    Writer& operator=(const Writer&) = delete;

    void printf(const char* fmt, ...) __attribute__((format(printf, 2, 3))) {
        va_list args;
        va_start(args, fmt);
        std::vfprintf(f_, fmt, args);
        va_end(args);
    }
    void raw(const void* data, std::size_t bytes) { std::fwrite(data, 1, bytes, f_); }

private:
    std::FILE* f_;
    std::string path_;
};

} // namespace

void write_coefficients_csv(const std::string& path,
                            const std::vector<sampler::CoefficientPathSet>& sets) {
    Writer w(path);
    w.printf("replicate,l,m,t,re,im\n");
    for (const auto& set : sets) {
        for (int l = 0; l <= set.truncation; ++l)
            for (int m = 0; m <= l; ++m)
                for (std::size_t ti = 0; ti < set.times.size(); ++ti) {
                    const auto v = set.at(l, m, ti);
                    w.printf("%llu,%d,%d,%.17g,%.17g,%.17g\n",
                             static_cast<unsigned long long>(set.replicate), l, m, set.times[ti],
                             v.real(), v.imag());
                }
    }
}

void write_field_csv(const std::string& path, const field::FieldSample& sample) {
    Writer w(path);
    w.printf("t,colatitude,longitude,value\n");
    const std::size_t np = sample.grid.points.size();
    for (std::size_t ti = 0; ti < sample.times.size(); ++ti)
        for (std::size_t p = 0; p < np; ++p)
            w.printf("%.17g,%.17g,%.17g,%.17g\n", sample.times[ti],
                     sample.grid.points[p].colatitude, sample.grid.points[p].longitude,
                     sample.at(ti, p));
}

void write_field_binary(const std::string& path, const field::FieldSample& sample) {
    Writer w(path);
    const char magic[4] = {'S', 'F', 'H', 'B'};
    w.raw(magic, 4);
    const std::uint32_t version = 1;
    w.raw(&version, 4);
    const std::uint64_t nt = sample.times.size();
    const std::uint64_t np = sample.grid.points.size();
    w.raw(&nt, 8);
    w.raw(&np, 8);
    w.raw(sample.times.data(), nt * sizeof(double));
    for (const auto& p : sample.grid.points) {
        w.raw(&p.colatitude, sizeof(double));
        w.raw(&p.longitude, sizeof(double));
    }
    w.raw(sample.values.data(), sample.values.size() * sizeof(double));
}

void write_table_csv(const std::string& path, const std::vector<std::string>& header,
                     const std::vector<std::vector<double>>& columns) {
    if (header.size() != columns.size())
        throw precondition_error("write_table_csv: header/column mismatch");
    Writer w(path);
    for (std::size_t c = 0; c < header.size(); ++c)
        w.printf("%s%s", header[c].c_str(), c + 1 == header.size() ? "\n" : ",");
    const std::size_t rows = columns.empty() ? 0 : columns.front().size();
    for (const auto& col : columns)
        if (col.size() != rows) throw precondition_error("write_table_csv: ragged columns");
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < columns.size(); ++c)
            w.printf("%.17g%s", columns[c][r], c + 1 == columns.size() ? "\n" : ",");
}

} // namespace sfh::io
