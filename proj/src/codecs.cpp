#include "aqua/codecs.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <memory>
#include <sstream>
#include <vector>

#include "aqua/image_ops.hpp"

namespace aqua {

namespace {

struct FileCloser {
    void operator()(FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
    FilePtr f(std::fopen(path.string().c_str(), mode));
    if (!f) throw IoError("cannot open " + path.string());
    return f;
}

struct PngReader {
    png_structp png = nullptr;
    png_infop info = nullptr;
    ~PngReader() { png_destroy_read_struct(&png, &info, nullptr); }
};

struct PngWriter {
    png_structp png = nullptr;
    png_infop info = nullptr;
    ~PngWriter() { png_destroy_write_struct(&png, &info); }
};

void read_png_raw(const std::filesystem::path& path, int want_channels, int want_bit_depth,
                  int& height, int& width, std::vector<uint8_t>& bytes) {
    FilePtr f = open_file(path, "rb");
    PngReader r;
    r.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!r.png) throw IoError("libpng init failed");
    r.info = png_create_info_struct(r.png);
    if (setjmp(png_jmpbuf(r.png)))
        throw FormatError("corrupt PNG: " + path.string());

    png_init_io(r.png, f.get());
    png_read_info(r.png, r.info);

    const int bit_depth = png_get_bit_depth(r.png, r.info);
    const int color = png_get_color_type(r.png, r.info);

    // Normalize to the requested layout.
    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(r.png);
    if (color == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(r.png);
    if (png_get_valid(r.png, r.info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(r.png);
    png_set_strip_alpha(r.png);
    if (want_channels == 3 && (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA))
        png_set_gray_to_rgb(r.png);
    if (want_channels == 1 && (color == PNG_COLOR_TYPE_RGB || color == PNG_COLOR_TYPE_RGB_ALPHA ||
                               color == PNG_COLOR_TYPE_PALETTE))
        png_set_rgb_to_gray_fixed(r.png, 1, -1, -1);
    if (want_bit_depth == 8 && bit_depth == 16) png_set_strip_16(r.png);
    if (want_bit_depth == 16 && bit_depth < 16) png_set_expand_16(r.png);
    png_read_update_info(r.png, r.info);

    height = static_cast<int>(png_get_image_height(r.png, r.info));
    width = static_cast<int>(png_get_image_width(r.png, r.info));
    const size_t rowbytes = png_get_rowbytes(r.png, r.info);
    if (rowbytes != static_cast<size_t>(width) * want_channels * (want_bit_depth / 8))
        throw FormatError("unexpected PNG layout: " + path.string());

    bytes.resize(rowbytes * height);
    std::vector<png_bytep> rows(height);
    for (int y = 0; y < height; ++y) rows[y] = bytes.data() + rowbytes * y;
    png_read_image(r.png, rows.data());
    png_read_end(r.png, nullptr);
}

void write_png_raw(const std::filesystem::path& path, int height, int width, int channels,
                   int bit_depth, const std::vector<uint8_t>& bytes) {
    FilePtr f = open_file(path, "wb");
    PngWriter w;
    w.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!w.png) throw IoError("libpng init failed");
    w.info = png_create_info_struct(w.png);
    if (setjmp(png_jmpbuf(w.png)))
        throw IoError("PNG write failed: " + path.string());

    png_init_io(w.png, f.get());
    png_set_IHDR(w.png, w.info, width, height, bit_depth,
                 channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(w.png, w.info);

    const size_t rowbytes = static_cast<size_t>(width) * channels * (bit_depth / 8);
    std::vector<png_bytep> rows(height);
    for (int y = 0; y < height; ++y)
        rows[y] = const_cast<png_bytep>(bytes.data() + rowbytes * y);
    png_write_image(w.png, rows.data());
    png_write_end(w.png, nullptr);
}

}  // namespace

ImageGrid read_png_rgb8(const std::filesystem::path& path) {
    int h, w;
    std::vector<uint8_t> bytes;
    read_png_raw(path, 3, 8, h, w, bytes);
    ImageGrid out(h, w, 3);
    for (size_t i = 0; i < bytes.size(); ++i)
        out.data[i] = bytes[i] / 255.0f;
    return out;
}

void write_png_rgb8(const std::filesystem::path& path, const ImageGrid& rgb) {
    if (rgb.channels != 3) throw FormatError("write_png_rgb8: expected 3 channels");
    std::vector<uint8_t> bytes(rgb.data.size());
    for (size_t i = 0; i < bytes.size(); ++i) {
        const float v = std::clamp(rgb.data[i], 0.0f, 1.0f);
        bytes[i] = static_cast<uint8_t>(std::lround(v * 255.0f));
    }
    write_png_raw(path, rgb.height, rgb.width, 3, 8, bytes);
}

DepthGrid read_png_gray16(const std::filesystem::path& path) {
    int h, w;
    std::vector<uint8_t> bytes;
    read_png_raw(path, 1, 16, h, w, bytes);
    DepthGrid out(h, w, 1);
    for (size_t p = 0; p < out.data.size(); ++p) {
        // PNG stores 16-bit samples big-endian.
        const uint16_t v = static_cast<uint16_t>((bytes[p * 2] << 8) | bytes[p * 2 + 1]);
        out.data[p] = v / 65535.0f;
    }
    return out;
}

void write_png_gray16(const std::filesystem::path& path, const DepthGrid& d) {
    if (d.channels != 1) throw FormatError("write_png_gray16: expected 1 channel");
    std::vector<uint8_t> bytes(d.data.size() * 2);
    for (size_t p = 0; p < d.data.size(); ++p) {
        const float v = std::clamp(d.data[p], 0.0f, 1.0f);
        const uint16_t q = static_cast<uint16_t>(std::lround(v * 65535.0));
        bytes[p * 2] = static_cast<uint8_t>(q >> 8);
        bytes[p * 2 + 1] = static_cast<uint8_t>(q & 0xFF);
    }
    write_png_raw(path, d.height, d.width, 1, 16, bytes);
}

DepthGrid read_pfm(const std::filesystem::path& path) {
    FilePtr f = open_file(path, "rb");

    auto next_token = [&]() -> std::string {
        std::string tok;
        int c;
        while ((c = std::fgetc(f.get())) != EOF && std::isspace(c)) {
        }
        if (c == EOF) throw FormatError("truncated PFM header: " + path.string());
        do {
            tok.push_back(static_cast<char>(c));
        } while ((c = std::fgetc(f.get())) != EOF && !std::isspace(c));
        return tok;
    };

    const std::string magic = next_token();
    if (magic != "Pf") {
        if (magic == "PF")
            throw FormatError("color PFM not supported: " + path.string());
        throw FormatError("not a PFM file: " + path.string());
    }
    int w = 0, h = 0;
    double scale = 0.0;
    try {
        w = std::stoi(next_token());
        h = std::stoi(next_token());
        scale = std::stod(next_token());
    } catch (const std::exception&) {
        throw FormatError("malformed PFM header: " + path.string());
    }
    if (w <= 0 || h <= 0 || scale == 0.0)
        throw FormatError("malformed PFM header: " + path.string());
    const bool file_little_endian = scale < 0.0;

    std::vector<uint8_t> raw(static_cast<size_t>(w) * h * 4);
    if (std::fread(raw.data(), 1, raw.size(), f.get()) != raw.size())
        throw FormatError("truncated PFM data: " + path.string());

    DepthGrid out(h, w, 1);
    const bool host_little = (std::endian::native == std::endian::little);
    for (int y = 0; y < h; ++y) {
        // PFM rows are stored bottom-up.
        const uint8_t* row = raw.data() + static_cast<size_t>(h - 1 - y) * w * 4;
        for (int x = 0; x < w; ++x) {
            uint8_t b[4];
            std::memcpy(b, row + static_cast<size_t>(x) * 4, 4);
            if (file_little_endian != host_little) std::swap(b[0], b[3]), std::swap(b[1], b[2]);
            float v;
            std::memcpy(&v, b, 4);
            out.at(y, x) = v;
        }
    }
    return out;
}

void write_pfm(const std::filesystem::path& path, const DepthGrid& d) {
    if (d.channels != 1) throw FormatError("write_pfm: expected 1 channel");
    FilePtr f = open_file(path, "wb");

    const bool host_little = (std::endian::native == std::endian::little);
    std::ostringstream header;
    header << "Pf\n" << d.width << " " << d.height << "\n"
           << (host_little ? "-1.0" : "1.0") << "\n";
    const std::string hs = header.str();
    if (std::fwrite(hs.data(), 1, hs.size(), f.get()) != hs.size())
        throw IoError("PFM write failed: " + path.string());

    for (int y = d.height - 1; y >= 0; --y) {
        const float* row = d.data.data() + static_cast<size_t>(y) * d.width;
        if (std::fwrite(row, 4, d.width, f.get()) != static_cast<size_t>(d.width))
            throw IoError("PFM write failed: " + path.string());
    }
}

DepthGrid read_depth_any(const std::filesystem::path& path) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), ::tolower);
    if (ext == ".pfm") return read_pfm(path);
    if (ext == ".png") return read_png_gray16(path);
    throw FormatError("unsupported depth format: " + path.string());
}

NormalGrid read_normal_png(const std::filesystem::path& path) {
    int h, w;
    std::vector<uint8_t> bytes;
    read_png_raw(path, 3, 8, h, w, bytes);
    return decode_normals(bytes, h, w);
}

void write_normal_png(const std::filesystem::path& path, const NormalGrid& n) {
    if (n.channels != 3) throw FormatError("write_normal_png: expected 3 channels");
    std::vector<uint8_t> bytes(n.data.size());
    for (size_t i = 0; i < bytes.size(); ++i) {
        const float v = std::clamp((n.data[i] + 1.0f) * 0.5f, 0.0f, 1.0f);
        bytes[i] = static_cast<uint8_t>(std::lround(v * 255.0f));
    }
    write_png_raw(path, n.height, n.width, 3, 8, bytes);
}

}  // namespace aqua
