#ifndef SEMCOM_ARCHIVE_HPP
#define SEMCOM_ARCHIVE_HPP

#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "semcom/common.hpp"

namespace semcom {

// Single-file container used for model checkpoints, dataset caches, and
// corpus statistics: a JSON manifest plus named typed arrays, all
// little-endian, round-tripping bit-exactly.
//
// Layout: "SMCA" | u16 version | u32 manifest_len | manifest bytes |
//         u32 array_count | per array: u16 name_len, name, u8 dtype,
//         u8 ndim, u32 dims..., raw data.
class Archive {
   public:
    static constexpr std::uint16_t kVersion = 1;

    enum class DType : std::uint8_t { f32 = 0, f64 = 1, u8 = 2, i32 = 3, u64 = 4 };

    struct Entry {
        DType dtype;
        std::vector<std::uint32_t> dims;
        std::vector<std::uint8_t> bytes;

        std::size_t element_count() const {
            std::size_t n = 1;
            for (auto d : dims) n *= d;
            return n;
        }
    };

    nlohmann::json manifest = nlohmann::json::object();

    template <class T>
    void add(const std::string& name, const T* data, std::vector<std::uint32_t> dims) {
        Entry e;
        e.dtype = dtype_of<T>();
        e.dims = std::move(dims);
        e.bytes.resize(e.element_count() * sizeof(T));
        if (!e.bytes.empty()) std::memcpy(e.bytes.data(), data, e.bytes.size());
        entries_[name] = std::move(e);
    }

    template <class T>
    void add(const std::string& name, const std::vector<T>& v, std::vector<std::uint32_t> dims = {}) {
        if (dims.empty()) dims = {static_cast<std::uint32_t>(v.size())};
        add(name, v.data(), std::move(dims));
    }

    template <class T>
    void add(const std::string& name, const Mat<T>& m) {
        add(name, m.data(), {static_cast<std::uint32_t>(m.rows()), static_cast<std::uint32_t>(m.cols())});
    }

    bool has(const std::string& name) const { return entries_.count(name) != 0; }

    const Entry& entry(const std::string& name) const {
        auto it = entries_.find(name);
        if (it == entries_.end()) throw IoError("archive: missing array '" + name + "'");
        return it->second;
    }

    template <class T>
    std::vector<T> get(const std::string& name) const {
        const Entry& e = entry(name);
        if (e.dtype != dtype_of<T>()) throw IoError("archive: dtype mismatch for '" + name + "'");
        std::vector<T> out(e.element_count());
        if (!out.empty()) std::memcpy(out.data(), e.bytes.data(), e.bytes.size());
        return out;
    }

    template <class T>
    Mat<T> get_mat(const std::string& name) const {
        const Entry& e = entry(name);
        if (e.dims.size() != 2) throw IoError("archive: '" + name + "' is not 2-d");
        if (e.dtype != dtype_of<T>()) throw IoError("archive: dtype mismatch for '" + name + "'");
        Mat<T> m(e.dims[0], e.dims[1]);
        if (e.bytes.size() != static_cast<std::size_t>(m.size()) * sizeof(T))
            throw IoError("archive: size mismatch for '" + name + "'");
        std::memcpy(m.data(), e.bytes.data(), e.bytes.size());
        return m;
    }

    std::vector<std::uint8_t> to_bytes() const {
        std::vector<std::uint8_t> out;
        append_raw(out, "SMCA", 4);
        append_u16(out, kVersion);
        const std::string mtext = manifest.dump();
        append_u32(out, static_cast<std::uint32_t>(mtext.size()));
        append_raw(out, mtext.data(), mtext.size());
        append_u32(out, static_cast<std::uint32_t>(entries_.size()));
        for (const auto& [name, e] : entries_) {
            append_u16(out, static_cast<std::uint16_t>(name.size()));
            append_raw(out, name.data(), name.size());
            out.push_back(static_cast<std::uint8_t>(e.dtype));
            out.push_back(static_cast<std::uint8_t>(e.dims.size()));
            for (auto d : e.dims) append_u32(out, d);
            append_raw(out, e.bytes.data(), e.bytes.size());
        }
        return out;
    }

    void save(const std::string& path) const {
        std::ofstream f(path, std::ios::binary | std::ios::trunc);
        if (!f) throw IoError("archive: cannot open '" + path + "' for writing");
        auto bytes = to_bytes();
        f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
        if (!f) throw IoError("archive: write failed for '" + path + "'");
    }

    static Archive from_bytes(const std::vector<std::uint8_t>& in) {
        Archive a;
        std::size_t pos = 0;
        char magic[4];
        read_raw(in, pos, magic, 4);
        if (std::memcmp(magic, "SMCA", 4) != 0) throw IoError("archive: bad magic");
        const std::uint16_t version = read_u16(in, pos);
        if (version != kVersion) throw IoError("archive: unsupported version " + std::to_string(version));
        const std::uint32_t mlen = read_u32(in, pos);
        std::string mtext(mlen, '\0');
        read_raw(in, pos, mtext.data(), mlen);
        a.manifest = nlohmann::json::parse(mtext);
        const std::uint32_t count = read_u32(in, pos);
        for (std::uint32_t i = 0; i < count; ++i) {
            const std::uint16_t nlen = read_u16(in, pos);
            std::string name(nlen, '\0');
            read_raw(in, pos, name.data(), nlen);
            Entry e;
            if (pos + 2 > in.size()) throw IoError("archive: truncated entry header");
            e.dtype = static_cast<DType>(in[pos++]);
            const std::uint8_t ndim = in[pos++];
            e.dims.resize(ndim);
            for (auto& d : e.dims) d = read_u32(in, pos);
            e.bytes.resize(e.element_count() * dtype_size(e.dtype));
            read_raw(in, pos, e.bytes.data(), e.bytes.size());
            a.entries_[name] = std::move(e);
        }
        if (pos != in.size()) throw IoError("archive: trailing bytes");
        return a;
    }

    static Archive load(const std::string& path) {
        std::ifstream f(path, std::ios::binary);
        if (!f) throw IoError("archive: cannot open '" + path + "'");
        std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
        return from_bytes(bytes);
    }

    std::uint64_t digest() const {
        auto bytes = to_bytes();
        return fnv1a(bytes.data(), bytes.size());
    }

   private:
    std::map<std::string, Entry> entries_;

    template <class T>
    static DType dtype_of() {
        if constexpr (std::is_same_v<T, float>) return DType::f32;
        else if constexpr (std::is_same_v<T, double>) return DType::f64;
        else if constexpr (std::is_same_v<T, std::uint8_t>) return DType::u8;
        else if constexpr (std::is_same_v<T, std::int32_t>) return DType::i32;
        else if constexpr (std::is_same_v<T, std::uint64_t>) return DType::u64;
        else static_assert(sizeof(T) == 0, "unsupported archive dtype");
    }

    static std::size_t dtype_size(DType t) {
        switch (t) {
            case DType::f32: return 4;
            case DType::f64: return 8;
            case DType::u8: return 1;
            case DType::i32: return 4;
            case DType::u64: return 8;
        }
        throw IoError("archive: unknown dtype");
    }

    static void append_raw(std::vector<std::uint8_t>& out, const void* p, std::size_t n) {
        const auto* b = static_cast<const std::uint8_t*>(p);
        out.insert(out.end(), b, b + n);
    }
    static void append_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
        out.push_back(static_cast<std::uint8_t>(v & 0xff));
        out.push_back(static_cast<std::uint8_t>(v >> 8));
    }
    static void append_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
        for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
    }
    static void read_raw(const std::vector<std::uint8_t>& in, std::size_t& pos, void* p, std::size_t n) {
        if (pos + n > in.size()) throw IoError("archive: truncated");
        if (n) std::memcpy(p, in.data() + pos, n);
        pos += n;
    }
    static std::uint16_t read_u16(const std::vector<std::uint8_t>& in, std::size_t& pos) {
        if (pos + 2 > in.size()) throw IoError("archive: truncated");
        std::uint16_t v = static_cast<std::uint16_t>(in[pos] | (in[pos + 1] << 8));
        pos += 2;
        return v;
    }
    static std::uint32_t read_u32(const std::vector<std::uint8_t>& in, std::size_t& pos) {
        if (pos + 4 > in.size()) throw IoError("archive: truncated");
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in[pos + i]) << (8 * i);
        pos += 4;
        return v;
    }
};

}  // namespace semcom

#endif
