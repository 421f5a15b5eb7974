#include "gandiv/image.hpp"

#include <cctype>
#include <fstream>
#include <stdexcept>

#include "gandiv/error.hpp"

namespace gandiv {

Image::Image(int w, int h, std::uint8_t fill) : width(w), height(h) {
    if (w < 1 || h < 1) throw std::invalid_argument("image dimensions must be >= 1");
    data.assign(static_cast<std::size_t>(w) * h, fill);
}

namespace {

struct ByteCursor {
    const std::vector<std::uint8_t>& bytes;
    std::size_t pos = 0;

    bool eof() const { return pos >= bytes.size(); }
    int peek() const { return eof() ? -1 : bytes[pos]; }
    int get() { return eof() ? -1 : bytes[pos++]; }

    // Whitespace and '#'-to-end-of-line comments separate header tokens.
    void skip_separators() {
        for (;;) {
            while (!eof() && std::isspace(peek())) ++pos;
            if (!eof() && peek() == '#') {
                while (!eof() && peek() != '\n') ++pos;
            } else {
                return;
            }
        }
    }

    long next_int(const char* what) {
        skip_separators();
        if (eof() || !std::isdigit(peek()))
            throw IoError(std::string("pgm: expected ") + what);
        long v = 0;
        while (!eof() && std::isdigit(peek())) {
            v = v * 10 + (get() - '0');
            if (v > 1000000000L) throw IoError(std::string("pgm: ") + what + " out of range");
        }
        return v;
    }
};

std::uint8_t rescale_sample(long p, long maxval) {
    if (p > maxval) throw IoError("pgm: sample exceeds declared maxval");
    return static_cast<std::uint8_t>(round_half_up(static_cast<double>(p) * 255.0 / maxval));
}

}  // namespace

Image decode_pgm(const std::vector<std::uint8_t>& bytes) {
    ByteCursor cur{bytes};
    if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '2'))
        throw IoError("pgm: unknown magic (want P5 or P2)");
    const bool binary = bytes[1] == '5';
    cur.pos = 2;

    const long w = cur.next_int("width");
    const long h = cur.next_int("height");
    const long maxval = cur.next_int("maxval");
    if (w < 1 || h < 1) throw IoError("pgm: zero image dimension");
    if (maxval < 1 || maxval > 255) throw IoError("pgm: maxval must be in [1, 255]");

    Image img(static_cast<int>(w), static_cast<int>(h));
    const std::size_t n = img.pixel_count();
    if (binary) {
        // Exactly one whitespace byte after maxval, then the raster.
        if (cur.eof() || !std::isspace(cur.peek())) throw IoError("pgm: malformed header");
        cur.get();
        if (bytes.size() - cur.pos < n) throw IoError("pgm: truncated pixel payload");
        for (std::size_t i = 0; i < n; ++i)
            img.data[i] = rescale_sample(bytes[cur.pos + i], maxval);
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            cur.skip_separators();
            if (cur.eof()) throw IoError("pgm: truncated pixel payload");
            img.data[i] = rescale_sample(cur.next_int("sample"), maxval);
        }
    }
    return img;
}

std::vector<std::uint8_t> encode_pgm(const Image& img, bool binary) {
    std::string header = (binary ? "P5 " : "P2 ") + std::to_string(img.width) + " " +
                         std::to_string(img.height) + " 255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    if (binary) {
        out.insert(out.end(), img.data.begin(), img.data.end());
    } else {
        std::string body;
        for (int y = 0; y < img.height; ++y) {
            for (int x = 0; x < img.width; ++x) {
                body += std::to_string(img.at(x, y));
                body += (x + 1 == img.width) ? '\n' : ' ';
            }
        }
        out.insert(out.end(), body.begin(), body.end());
    }
    return out;
}

Image load_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open image file: " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    try {
        return decode_pgm(bytes);
    } catch (const IoError& e) {
        throw IoError(std::string(e.what()) + " (" + path + ")");
    }
}

void save_pgm(const std::string& path, const Image& img, bool binary) {
    const auto bytes = encode_pgm(img, binary);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open output file: " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed: " + path);
}

Image resize_bilinear(const Image& img, int out_w, int out_h) {
    if (out_w < 1 || out_h < 1) throw std::invalid_argument("resize: target dimension must be >= 1");
    if (out_w == img.width && out_h == img.height) return img;

    Image out(out_w, out_h);
    const double sx = static_cast<double>(img.width) / out_w;
    const double sy = static_cast<double>(img.height) / out_h;
    for (int y = 0; y < out_h; ++y) {
        double fy = (y + 0.5) * sy - 0.5;
        if (fy < 0) fy = 0;
        if (fy > img.height - 1) fy = img.height - 1;
        const int y0 = static_cast<int>(fy);
        const int y1 = y0 + 1 < img.height ? y0 + 1 : y0;
        const double wy = fy - y0;
        for (int x = 0; x < out_w; ++x) {
            double fx = (x + 0.5) * sx - 0.5;
            if (fx < 0) fx = 0;
            if (fx > img.width - 1) fx = img.width - 1;
            const int x0 = static_cast<int>(fx);
            const int x1 = x0 + 1 < img.width ? x0 + 1 : x0;
            const double wx = fx - x0;
            const double top = (1.0 - wx) * img.at(x0, y0) + wx * img.at(x1, y0);
            const double bot = (1.0 - wx) * img.at(x0, y1) + wx * img.at(x1, y1);
            out.at(x, y) = clamp_u8((1.0 - wy) * top + wy * bot);
        }
    }
    return out;
}

}  // namespace gandiv
