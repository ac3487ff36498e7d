#pragma once

#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "csi/error.hpp"
#include "csi/types.hpp"

namespace csi {

inline constexpr std::uint16_t kFormatVersion = 1;

// ---------------------------------------------------------------------------
// Little-endian byte buffers. All container formats are explicitly
// little-endian regardless of host byte order.

class ByteWriter {
public:
    void u8(std::uint8_t v) { buf_.push_back(v); }
    void u16(std::uint16_t v) { append_le(v, 2); }
    void u32(std::uint32_t v) { append_le(v, 4); }
    void u64(std::uint64_t v) { append_le(v, 8); }
    void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void bytes(std::span<const unsigned char> data) {
        buf_.insert(buf_.end(), data.begin(), data.end());
    }
    void magic(const char (&m)[5]) {
        buf_.insert(buf_.end(), m, m + 4);
    }

    const std::vector<unsigned char>& buffer() const { return buf_; }
    std::vector<unsigned char> take() { return std::move(buf_); }

private:
    void append_le(std::uint64_t v, int n) {
        for (int i = 0; i < n; ++i) buf_.push_back(static_cast<unsigned char>(v >> (8 * i)));
    }

    std::vector<unsigned char> buf_;
};

class ByteReader {
public:
    explicit ByteReader(std::span<const unsigned char> data) : data_(data) {}

    std::uint8_t u8() { return static_cast<std::uint8_t>(take(1)[0]); }
    std::uint16_t u16() { return static_cast<std::uint16_t>(read_le(2)); }
    std::uint32_t u32() { return static_cast<std::uint32_t>(read_le(4)); }
    std::uint64_t u64() { return read_le(8); }
    float f32() { return std::bit_cast<float>(u32()); }
    double f64() { return std::bit_cast<double>(u64()); }

    void expect_magic(const char (&m)[5], const char* what) {
        auto got = take(4);
        if (std::memcmp(got.data(), m, 4) != 0)
            throw FormatError(std::string("bad magic for ") + what);
    }

    std::span<const unsigned char> take(std::size_t n) {
        if (pos_ + n > data_.size()) throw FormatError("unexpected end of data");
        auto out = data_.subspan(pos_, n);
        pos_ += n;
        return out;
    }

    bool at_end() const { return pos_ == data_.size(); }
    std::size_t position() const { return pos_; }

private:
    std::uint64_t read_le(int n) {
        auto b = take(static_cast<std::size_t>(n));
        std::uint64_t v = 0;
        for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
        return v;
    }

    std::span<const unsigned char> data_;
    std::size_t pos_ = 0;
};

inline std::vector<unsigned char> read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open file: " + path.string());
    std::vector<unsigned char> bytes{std::istreambuf_iterator<char>(in),
                                     std::istreambuf_iterator<char>()};
    return bytes;
}

inline void write_file_bytes(const std::filesystem::path& path,
                             std::span<const unsigned char> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot open file for writing: " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw FormatError("write failed: " + path.string());
}

// ---------------------------------------------------------------------------
// Number formatting. Values travel as 32-bit floats; shortest round-trip
// formatting keeps CSV and binary bit-identical for them.

inline std::string format_float(float v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s, const char* what) {
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc{} || res.ptr != last)
        throw FormatError(std::string("cannot parse number in ") + what + ": '" +
                          std::string(s) + "'");
    return v;
}

inline long parse_int(std::string_view s, const char* what) {
    long v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw FormatError(std::string("cannot parse integer in ") + what + ": '" +
                          std::string(s) + "'");
    return v;
}

// ---------------------------------------------------------------------------
// CSIF binary interchange.
//
//   magic "CSIF" | version u16 | flags u16 (bit 0: amplitude-only)
//   | W u32 | frame count u64 | frame_rate f64
//   | frames: (timestamp f64, label u16, W*f32 amplitudes or 2W*f32 re/im)

inline std::vector<unsigned char> serialize_binary(const CsiDataset& ds) {
    ByteWriter w;
    w.magic("CSIF");
    w.u16(kFormatVersion);
    const bool amp_only = ds.is_amplitude_only();
    w.u16(amp_only ? 1 : 0);
    w.u32(static_cast<std::uint32_t>(ds.meta.subcarrier_count));
    w.u64(ds.size());
    w.f64(ds.meta.frame_rate);
    for (std::size_t i = 0; i < ds.size(); ++i) {
        w.f64(ds.timestamps[i]);
        if (ds.labels[i] < 0 || ds.labels[i] > 0xffff)
            throw FormatError("label out of u16 range");
        w.u16(static_cast<std::uint16_t>(ds.labels[i]));
        auto row = amp_only ? ds.amplitudes.row(i) : ds.complex_values.row(i);
        for (double v : row) w.f32(static_cast<float>(v));
    }
    return w.take();
}

inline CsiDataset parse_binary(std::span<const unsigned char> bytes) {
    ByteReader r(bytes);
    r.expect_magic("CSIF", "CSI dataset");
    const auto version = r.u16();
    if (version != kFormatVersion)
        throw FormatError("unsupported CSIF version " + std::to_string(version));
    const auto flags = r.u16();
    const bool amp_only = (flags & 1) != 0;
    const std::size_t w = r.u32();
    const std::size_t n = r.u64();
    if (w == 0) throw FormatError("zero subcarrier count");

    CsiDataset ds;
    ds.meta.subcarrier_count = w;
    ds.meta.frame_rate = r.f64();
    ds.meta.guard_mask.assign(w, false);
    ds.timestamps.resize(n);
    ds.labels.resize(n);
    const std::size_t row_width = amp_only ? w : 2 * w;
    Matrix values(n, row_width);
    for (std::size_t i = 0; i < n; ++i) {
        ds.timestamps[i] = r.f64();
        ds.labels[i] = r.u16();
        auto row = values.row(i);
        for (std::size_t j = 0; j < row_width; ++j) row[j] = r.f32();
    }
    if (amp_only)
        ds.amplitudes = std::move(values);
    else
        ds.complex_values = std::move(values);

    // Timestamps may be omitted (stored as NaN): synthesize from the rate.
    bool any_nan = false;
    for (double t : ds.timestamps) any_nan |= std::isnan(t);
    if (any_nan) {
        if (ds.meta.frame_rate <= 0.0)
            throw FormatError("missing timestamps and no frame rate to synthesize them");
        for (std::size_t i = 0; i < n; ++i)
            ds.timestamps[i] = static_cast<double>(i) / ds.meta.frame_rate;
    }

    const std::size_t k = ds.class_count();
    for (std::size_t c = 0; c < k; ++c) ds.meta.class_names.push_back("class_" + std::to_string(c));
    ds.validate();
    return ds;
}

// ---------------------------------------------------------------------------
// CSIF CSV interchange.
//
//   # csif,v1,W=<int>,rate=<float>,width_mhz=<int>[,amp=1]
//   timestamp,label,re_0,im_0,...   (or a_0,...,a_{W-1} when amp=1)

inline std::string serialize_csv(const CsiDataset& ds) {
    std::string out;
    const bool amp_only = ds.is_amplitude_only();
    out += "# csif,v1,W=" + std::to_string(ds.meta.subcarrier_count) +
           ",rate=" + format_double(ds.meta.frame_rate) +
           ",width_mhz=" + std::to_string(ds.meta.channel_width_mhz);
    if (amp_only) out += ",amp=1";
    out += "\n";
    for (std::size_t i = 0; i < ds.size(); ++i) {
        out += format_double(ds.timestamps[i]);
        out += ',';
        out += std::to_string(ds.labels[i]);
        auto row = amp_only ? ds.amplitudes.row(i) : ds.complex_values.row(i);
        for (double v : row) {
            out += ',';
            out += format_float(static_cast<float>(v));
        }
        out += '\n';
    }
    return out;
}

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return fields;
}

inline CsiDataset parse_csv(std::string_view text) {
    std::size_t line_start = 0;
    auto next_line = [&](std::string_view& line) {
        if (line_start >= text.size()) return false;
        auto nl = text.find('\n', line_start);
        if (nl == std::string_view::npos) nl = text.size();
        line = text.substr(line_start, nl - line_start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        line_start = nl + 1;
        return true;
    };

    std::string_view header;
    if (!next_line(header)) throw FormatError("empty CSV file");
    auto fields = split_csv_line(header);
    if (fields.size() < 2 || fields[0] != "# csif" || fields[1] != "v1")
        throw FormatError("malformed CSV header: expected '# csif,v1,...'");

    CsiDataset ds;
    bool amp_only = false;
    bool have_w = false;
    for (std::size_t i = 2; i < fields.size(); ++i) {
        const auto f = fields[i];
        const auto eq = f.find('=');
        if (eq == std::string_view::npos)
            throw FormatError("malformed CSV header field: '" + std::string(f) + "'");
        const auto key = f.substr(0, eq);
        const auto value = f.substr(eq + 1);
        if (key == "W") {
            ds.meta.subcarrier_count = static_cast<std::size_t>(parse_int(value, "header W"));
            have_w = true;
        } else if (key == "rate") {
            ds.meta.frame_rate = parse_double(value, "header rate");
        } else if (key == "width_mhz") {
            ds.meta.channel_width_mhz = static_cast<int>(parse_int(value, "header width_mhz"));
        } else if (key == "amp") {
            amp_only = parse_int(value, "header amp") != 0;
        } else {
            throw FormatError("unknown CSV header field: '" + std::string(key) + "'");
        }
    }
    if (!have_w || ds.meta.subcarrier_count == 0)
        throw FormatError("CSV header missing subcarrier count W");

    const std::size_t w = ds.meta.subcarrier_count;
    const std::size_t row_width = amp_only ? w : 2 * w;
    std::vector<double> values;
    std::string_view line;
    std::size_t n = 0;
    bool missing_timestamps = false;
    while (next_line(line)) {
        if (line.empty()) continue;
        auto cols = split_csv_line(line);
        if (cols.size() != row_width + 2)
            throw ShapeError("row " + std::to_string(n) + " has " +
                             std::to_string(cols.size() - 2) + " values, expected " +
                             std::to_string(row_width));
        if (cols[0].empty()) {
            missing_timestamps = true;
            ds.timestamps.push_back(0.0);
        } else {
            ds.timestamps.push_back(parse_double(cols[0], "timestamp"));
        }
        ds.labels.push_back(static_cast<int>(parse_int(cols[1], "label")));
        for (std::size_t j = 0; j < row_width; ++j)
            values.push_back(parse_double(cols[2 + j], "value"));
        ++n;
    }

    Matrix m(n, row_width);
    std::copy(values.begin(), values.end(), m.data().begin());
    if (amp_only)
        ds.amplitudes = std::move(m);
    else
        ds.complex_values = std::move(m);
    ds.meta.guard_mask.assign(w, false);
    if (missing_timestamps) {
        if (ds.meta.frame_rate <= 0.0)
            throw FormatError("missing timestamps and no frame rate to synthesize them");
        for (std::size_t i = 0; i < n; ++i)
            ds.timestamps[i] = static_cast<double>(i) / ds.meta.frame_rate;
    }
    const std::size_t k = ds.class_count();
    for (std::size_t c = 0; c < k; ++c) ds.meta.class_names.push_back("class_" + std::to_string(c));
    ds.validate();
    return ds;
}

// ---------------------------------------------------------------------------

enum class FileFormat { kCsv, kBinary, kAuto };

inline FileFormat detect_format(std::span<const unsigned char> bytes) {
    if (bytes.size() >= 4 && std::memcmp(bytes.data(), "CSIF", 4) == 0) return FileFormat::kBinary;
    if (bytes.size() >= 6 && std::memcmp(bytes.data(), "# csif", 6) == 0) return FileFormat::kCsv;
    throw FormatError("unrecognized dataset file (neither CSIF binary nor csif CSV)");
}

inline CsiDataset load_dataset(const std::filesystem::path& path,
                               FileFormat format = FileFormat::kAuto) {
    const auto bytes = read_file_bytes(path);
    if (format == FileFormat::kAuto) format = detect_format(bytes);
    if (format == FileFormat::kBinary) return parse_binary(bytes);
    return parse_csv(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

inline void save_dataset(const CsiDataset& ds, const std::filesystem::path& path,
                         FileFormat format = FileFormat::kBinary) {
    if (format == FileFormat::kAuto) format = FileFormat::kBinary;
    if (format == FileFormat::kBinary) {
        const auto bytes = serialize_binary(ds);
        write_file_bytes(path, bytes);
    } else {
        const auto text = serialize_csv(ds);
        write_file_bytes(path, {reinterpret_cast<const unsigned char*>(text.data()), text.size()});
    }
}

}  // namespace csi
