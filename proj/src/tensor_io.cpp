#include "stochdef/tensor_io.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace stochdef {

namespace {

void put_u16(std::ostream& out, std::uint16_t v) {
    const char b[2] = {static_cast<char>(v & 0xFF), static_cast<char>((v >> 8) & 0xFF)};
    out.write(b, 2);
}

std::uint16_t get_u16(const unsigned char* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint16_t checked_u16(int v, const char* what) {
    if (v < 0 || v > std::numeric_limits<std::uint16_t>::max()) {
        throw std::invalid_argument(std::string("tensor file: ") + what + " does not fit in u16");
    }
    return static_cast<std::uint16_t>(v);
}

} // namespace

void write_tensors(std::ostream& out, const std::vector<ImageTensor>& records) {
    if (records.empty()) {
        throw std::invalid_argument("tensor file: at least one record is required");
    }
    const Shape shape = records.front().shape();
    for (const auto& r : records) {
        if (r.shape() != shape) {
            throw std::invalid_argument("tensor file: all records must share one shape");
        }
    }
    out.write("STDB", 4);
    out.put(static_cast<char>(kTensorFileVersion));
    out.put(static_cast<char>(kDtypeFloat32));
    put_u16(out, 0);
    put_u16(out, checked_u16(shape.height, "height"));
    put_u16(out, checked_u16(shape.width, "width"));
    put_u16(out, checked_u16(shape.channels, "channels"));
    put_u16(out, checked_u16(static_cast<int>(records.size()), "count"));
    for (const auto& r : records) {
        for (double v : r.values()) {
            const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(v));
            const char b[4] = {static_cast<char>(bits & 0xFF), static_cast<char>((bits >> 8) & 0xFF),
                               static_cast<char>((bits >> 16) & 0xFF), static_cast<char>((bits >> 24) & 0xFF)};
            out.write(b, 4);
        }
    }
    if (!out) {
        throw std::runtime_error("tensor file: write failed");
    }
}

std::vector<ImageTensor> read_tensors(std::istream& in) {
    std::array<unsigned char, 16> header{};
    in.read(reinterpret_cast<char*>(header.data()), header.size());
    if (in.gcount() != static_cast<std::streamsize>(header.size())) {
        throw std::runtime_error("tensor file: truncated header");
    }
    if (std::memcmp(header.data(), "STDB", 4) != 0) {
        throw std::runtime_error("tensor file: bad magic");
    }
    if (header[4] != kTensorFileVersion) {
        throw std::runtime_error("tensor file: unsupported version " + std::to_string(header[4]));
    }
    if (header[5] != kDtypeFloat32) {
        throw std::runtime_error("tensor file: unsupported dtype " + std::to_string(header[5]));
    }
    const Shape shape{get_u16(&header[8]), get_u16(&header[10]), get_u16(&header[12])};
    const int count = get_u16(&header[14]);
    std::vector<ImageTensor> records;
    records.reserve(static_cast<std::size_t>(count));
    std::vector<unsigned char> buf(shape.size() * 4);
    for (int i = 0; i < count; ++i) {
        in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
        if (in.gcount() != static_cast<std::streamsize>(buf.size())) {
            throw std::runtime_error("tensor file: truncated payload at record " + std::to_string(i));
        }
        std::vector<double> values(shape.size());
        for (std::size_t k = 0; k < values.size(); ++k) {
            const unsigned char* p = &buf[4 * k];
            const std::uint32_t bits = static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
                                       (static_cast<std::uint32_t>(p[2]) << 16) |
                                       (static_cast<std::uint32_t>(p[3]) << 24);
            values[k] = std::bit_cast<float>(bits);
        }
        records.emplace_back(shape, std::move(values));
    }
    return records;
}

void save_tensors(const std::filesystem::path& path, const std::vector<ImageTensor>& records) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    }
    write_tensors(out, records);
}

std::vector<ImageTensor> load_tensors(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string());
    }
    return read_tensors(in);
}

void save_labels(const std::filesystem::path& path, const std::vector<int>& labels) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    }
    for (int l : labels) {
        put_u16(out, checked_u16(l, "label"));
    }
    if (!out) {
        throw std::runtime_error("label file: write failed");
    }
}

std::vector<int> load_labels(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string());
    }
    std::vector<int> labels;
    unsigned char b[2];
    while (in.read(reinterpret_cast<char*>(b), 2)) {
        labels.push_back(get_u16(b));
    }
    if (in.gcount() != 0) {
        throw std::runtime_error("label file: odd byte count in " + path.string());
    }
    return labels;
}

} // namespace stochdef
