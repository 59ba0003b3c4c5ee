#include "amga/util/tensor_file.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include <zlib.h>

namespace amga::util {

static_assert(std::endian::native == std::endian::little, "tensor files assume a little-endian host");
static_assert(sizeof(float) == 4);

namespace {

void put_u32(std::string& out, std::uint32_t v)
{
    char b[4];
    std::memcpy(b, &v, 4);
    out.append(b, 4);
}

class Reader {
public:
    explicit Reader(std::string_view bytes) : bytes_(bytes) { }

    void need(std::size_t n) const
    {
        if (pos_ + n > bytes_.size()) throw ParseError("truncated payload");
    }

    std::uint32_t u32()
    {
        need(4);
        std::uint32_t v;
        std::memcpy(&v, bytes_.data() + pos_, 4);
        pos_ += 4;
        return v;
    }

    std::string_view take(std::size_t n)
    {
        need(n);
        auto s = bytes_.substr(pos_, n);
        pos_ += n;
        return s;
    }

    std::size_t pos() const { return pos_; }

private:
    std::string_view bytes_;
    std::size_t pos_ = 0;
};

std::uint32_t crc_of(std::string_view bytes)
{
    uLong crc = crc32(0L, Z_NULL, 0);
    crc = crc32(crc, reinterpret_cast<const Bytef*>(bytes.data()), static_cast<uInt>(bytes.size()));
    return static_cast<std::uint32_t>(crc);
}

} // namespace

std::string encode_tensor_file(std::string_view magic, const nlohmann::json& header, const std::vector<Tensor>& tensors)
{
    if (magic.size() != 8) throw ContractError("tensor file magic must be 8 bytes");
    std::string out(magic);
    put_u32(out, kTensorFileVersion);
    const std::string h = header.dump();
    put_u32(out, static_cast<std::uint32_t>(h.size()));
    out += h;
    put_u32(out, static_cast<std::uint32_t>(tensors.size()));
    for (const auto& t : tensors) {
        put_u32(out, static_cast<std::uint32_t>(t.rank()));
        for (auto d : t.shape()) put_u32(out, static_cast<std::uint32_t>(d));
        out.append(reinterpret_cast<const char*>(t.data().data()), t.numel() * sizeof(float));
    }
    put_u32(out, crc_of(out));
    return out;
}

TensorFile decode_tensor_file(std::string_view magic, std::string_view bytes)
{
    Reader r(bytes);
    if (bytes.size() < 8 || bytes.substr(0, 8) != magic) throw ParseError("bad magic");
    r.take(8);
    const auto version = r.u32();
    if (version != kTensorFileVersion) {
        throw ParseError("unsupported version " + std::to_string(version) + " (expected " +
                         std::to_string(kTensorFileVersion) + ")");
    }
    TensorFile f;
    const auto hlen = r.u32();
    const auto htext = r.take(hlen);
    const auto count = r.u32();
    for (std::uint32_t i = 0; i < count; ++i) {
        const auto rank = r.u32();
        if (rank > 8) throw ParseError("truncated payload");
        Shape shape(rank);
        for (auto& d : shape) d = r.u32();
        const std::size_t n = shape_numel(shape);
        const auto raw = r.take(n * sizeof(float));
        std::vector<float> data(n);
        std::memcpy(data.data(), raw.data(), raw.size());
        f.tensors.emplace_back(std::move(shape), std::move(data));
    }
    const std::size_t body = r.pos();
    const auto stored = r.u32();
    if (stored != crc_of(bytes.substr(0, body))) throw ParseError("crc mismatch");
    try {
        f.header = nlohmann::json::parse(htext);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("malformed header: ") + e.what());
    }
    return f;
}

std::string crc32_hex(std::string_view bytes)
{
    char buf[9];
    std::snprintf(buf, sizeof buf, "%08x", static_cast<unsigned>(crc_of(bytes)));
    return buf;
}

std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view bytes)
{
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
        if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("failed writing " + path.string());
}

void write_tensor_file(const std::filesystem::path& path, std::string_view magic, const nlohmann::json& header,
                       const std::vector<Tensor>& tensors)
{
    write_file(path, encode_tensor_file(magic, header, tensors));
}

TensorFile read_tensor_file(const std::filesystem::path& path, std::string_view magic)
{
    return decode_tensor_file(magic, read_file(path));
}

} // namespace amga::util
