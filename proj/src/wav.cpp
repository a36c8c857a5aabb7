#include "plmodem/wav.hpp"

#include "plmodem/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <vector>

namespace plmodem::wav {

namespace {

std::uint32_t read_u32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) |
           (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t read_u16(const unsigned char* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void put_u32(std::vector<unsigned char>& v, std::uint32_t x) {
    v.push_back(x & 0xff);
    v.push_back((x >> 8) & 0xff);
    v.push_back((x >> 16) & 0xff);
    v.push_back((x >> 24) & 0xff);
}

void put_u16(std::vector<unsigned char>& v, std::uint16_t x) {
    v.push_back(x & 0xff);
    v.push_back((x >> 8) & 0xff);
}

} // namespace

channel::Waveform read(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        fail("FileNotFound", "cannot open " + path);
    std::vector<unsigned char> data((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    if (data.size() < 44 || std::memcmp(data.data(), "RIFF", 4) != 0 ||
        std::memcmp(data.data() + 8, "WAVE", 4) != 0)
        fail("UnsupportedFormat", "not a RIFF/WAVE file: " + path);

    channel::Waveform w;
    bool have_fmt = false;
    std::size_t pos = 12;
    while (pos + 8 <= data.size()) {
        std::uint32_t chunk_size = read_u32(data.data() + pos + 4);
        const unsigned char* body = data.data() + pos + 8;
        if (pos + 8 + chunk_size > data.size())
            fail("UnsupportedFormat", "truncated chunk in " + path);
        if (std::memcmp(data.data() + pos, "fmt ", 4) == 0) {
            if (chunk_size < 16)
                fail("UnsupportedFormat", "short fmt chunk");
            std::uint16_t format = read_u16(body);
            std::uint16_t channels = read_u16(body + 2);
            std::uint32_t rate = read_u32(body + 4);
            std::uint16_t bits = read_u16(body + 14);
            if (format != 1)
                fail("UnsupportedFormat", "only PCM is supported");
            if (channels != 1)
                fail("UnsupportedFormat", "only mono is supported, got " +
                                              std::to_string(channels) +
                                              " channels");
            if (bits != 16)
                fail("UnsupportedFormat", "only 16-bit samples are supported");
            w.sample_rate = static_cast<double>(rate);
            have_fmt = true;
        } else if (std::memcmp(data.data() + pos, "data", 4) == 0) {
            if (!have_fmt)
                fail("UnsupportedFormat", "data chunk before fmt chunk");
            std::size_t n = chunk_size / 2;
            w.samples.resize(n);
            for (std::size_t i = 0; i < n; ++i) {
                std::int16_t s = static_cast<std::int16_t>(read_u16(body + 2 * i));
                w.samples[i] = static_cast<double>(s) / 32768.0 * kFullScaleMa;
            }
            return w;
        }
        pos += 8 + chunk_size + (chunk_size & 1);
    }
    fail("UnsupportedFormat", "no data chunk in " + path);
}

void write(const std::string& path, const channel::Waveform& w) {
    std::uint32_t n = static_cast<std::uint32_t>(w.samples.size());
    std::uint32_t data_bytes = n * 2;
    std::vector<unsigned char> out;
    out.reserve(44 + data_bytes);
    out.insert(out.end(), {'R', 'I', 'F', 'F'});
    put_u32(out, 36 + data_bytes);
    out.insert(out.end(), {'W', 'A', 'V', 'E'});
    out.insert(out.end(), {'f', 'm', 't', ' '});
    put_u32(out, 16);
    put_u16(out, 1); // PCM
    put_u16(out, 1); // mono
    std::uint32_t rate = static_cast<std::uint32_t>(std::llround(w.sample_rate));
    put_u32(out, rate);
    put_u32(out, rate * 2); // byte rate
    put_u16(out, 2);        // block align
    put_u16(out, 16);       // bits per sample
    out.insert(out.end(), {'d', 'a', 't', 'a'});
    put_u32(out, data_bytes);
    for (double v : w.samples) {
        double scaled = v / kFullScaleMa * 32768.0;
        long q = std::lround(scaled);
        q = std::clamp(q, -32768L, 32767L);
        put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
    }
    std::ofstream f(path, std::ios::binary);
    if (!f)
        fail("FileWriteError", "cannot write " + path);
    f.write(reinterpret_cast<const char*>(out.data()),
            static_cast<std::streamsize>(out.size()));
}

} // namespace plmodem::wav
