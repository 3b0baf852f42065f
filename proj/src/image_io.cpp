#include "telltale/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "telltale/error.hpp"

namespace telltale {

namespace {

constexpr std::array<char, 4> kMagic = {'T', 'T', 'W', 'M'};

void put_u32(std::vector<unsigned char>& buf, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xFFu));
}

std::uint32_t get_u32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::string lower_extension(const std::filesystem::path& path) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    return ext;
}

}  // namespace

void write_ttwm(const Image& img, const std::filesystem::path& path) {
    std::vector<unsigned char> buf;
    buf.reserve(kTtwmHeaderBytes + img.size() * 4);
    buf.insert(buf.end(), kMagic.begin(), kMagic.end());
    buf.push_back(kTtwmVersion);
    put_u32(buf, static_cast<std::uint32_t>(img.height()));
    put_u32(buf, static_cast<std::uint32_t>(img.width()));
    put_u32(buf, static_cast<std::uint32_t>(img.channels()));
    for (float v : img.values()) put_u32(buf, std::bit_cast<std::uint32_t>(v));

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open for writing: " + path.string());
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (!out) throw Error("write failed: " + path.string());
}

Image read_ttwm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open for reading: " + path.string());
    const std::vector<unsigned char> buf((std::istreambuf_iterator<char>(in)),
                                         std::istreambuf_iterator<char>());
    const std::string where = path.string();
    if (buf.size() < kTtwmHeaderBytes) throw FormatError(where + ": truncated TTWM header");
    if (std::memcmp(buf.data(), kMagic.data(), kMagic.size()) != 0) {
        throw FormatError(where + ": bad TTWM magic");
    }
    if (buf[4] != kTtwmVersion) {
        throw FormatError(where + ": unsupported TTWM version " + std::to_string(buf[4]));
    }
    const std::uint32_t height = get_u32(buf.data() + 5);
    const std::uint32_t width = get_u32(buf.data() + 9);
    const std::uint32_t channels = get_u32(buf.data() + 13);
    if (height == 0 || width == 0 || (channels != 1 && channels != 3) || height > (1u << 20) ||
        width > (1u << 20)) {
        throw FormatError(where + ": invalid TTWM shape");
    }
    const std::size_t count = static_cast<std::size_t>(height) * width * channels;
    if (buf.size() != kTtwmHeaderBytes + count * 4) {
        throw FormatError(where + ": TTWM payload length mismatch (truncated or trailing bytes)");
    }
    std::vector<float> data(count);
    for (std::size_t i = 0; i < count; ++i) {
        data[i] = std::bit_cast<float>(get_u32(buf.data() + kTtwmHeaderBytes + 4 * i));
    }
    return Image(static_cast<int>(height), static_cast<int>(width), static_cast<int>(channels),
                 std::move(data));
}

void write_png(const Image& img, const std::filesystem::path& path) {
    png_image png;
    std::memset(&png, 0, sizeof(png));
    png.version = PNG_IMAGE_VERSION;
    png.width = static_cast<png_uint_32>(img.width());
    png.height = static_cast<png_uint_32>(img.height());
    png.format = img.channels() == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;

    std::vector<png_byte> bytes(img.size());
    const auto values = img.values();
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double v = std::clamp(static_cast<double>(values[i]), 0.0, 1.0);
        bytes[i] = static_cast<png_byte>(std::lround(255.0 * v));
    }
    if (png_image_write_to_file(&png, path.string().c_str(), 0, bytes.data(), 0, nullptr) == 0) {
        const std::string msg = png.message;
        png_image_free(&png);
        throw Error("PNG write failed for " + path.string() + ": " + msg);
    }
}

Image read_png(const std::filesystem::path& path) {
    png_image png;
    std::memset(&png, 0, sizeof(png));
    png.version = PNG_IMAGE_VERSION;
    if (png_image_begin_read_from_file(&png, path.string().c_str()) == 0) {
        throw FormatError(path.string() + ": " + png.message);
    }
    const bool colour = (png.format & PNG_FORMAT_FLAG_COLOR) != 0;
    png.format = colour ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
    const int channels = colour ? 3 : 1;
    std::vector<png_byte> bytes(PNG_IMAGE_SIZE(png));
    if (png_image_finish_read(&png, nullptr, bytes.data(), 0, nullptr) == 0) {
        const std::string msg = png.message;
        png_image_free(&png);
        throw FormatError(path.string() + ": " + msg);
    }
    Image img(static_cast<int>(png.height), static_cast<int>(png.width), channels);
    auto values = img.values();
    for (std::size_t i = 0; i < values.size(); ++i) values[i] = static_cast<float>(bytes[i] / 255.0);
    return img;
}

Image load_image(const std::filesystem::path& path) {
    const std::string ext = lower_extension(path);
    if (ext == ".ttwm") return read_ttwm(path);
    if (ext == ".png") return read_png(path);
    throw FormatError("unsupported image extension '" + ext + "' for " + path.string());
}

void save_image(const Image& img, const std::filesystem::path& path) {
    const std::string ext = lower_extension(path);
    if (ext == ".ttwm") {
        write_ttwm(img, path);
    } else if (ext == ".png") {
        write_png(img, path);
    } else {
        throw FormatError("unsupported image extension '" + ext + "' for " + path.string());
    }
}

}  // namespace telltale
