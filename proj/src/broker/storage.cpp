#include "dw/broker/storage.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>

namespace dw::broker {

void StorageProvider::check_available()
{
    std::lock_guard lock(mu_);
    last_latency_ = faults_.latency_ms;
    if (faults_.unavailable) {
        ++stats_.failures;
        throw StorageFailure("provider " + location_ + " is unavailable");
    }
}

void StorageProvider::put(const std::string& file_id, std::uint16_t share_id, ByteView blob)
{
    {
        std::lock_guard lock(mu_);
        ++stats_.puts;
    }
    check_available();
    store(file_id, share_id, blob);
}

Bytes StorageProvider::get(const std::string& file_id, std::uint16_t share_id)
{
    {
        std::lock_guard lock(mu_);
        ++stats_.gets;
    }
    check_available();
    auto blob = load(file_id, share_id);
    if (faults().corrupting && !blob.empty()) blob[blob.size() / 2] ^= 0x5a;
    return blob;
}

std::vector<std::pair<std::string, std::uint16_t>> StorageProvider::list()
{
    check_available();
    return keys();
}

void StorageProvider::set_faults(const Faults& f)
{
    std::lock_guard lock(mu_);
    faults_ = f;
}

Faults StorageProvider::faults() const
{
    std::lock_guard lock(mu_);
    return faults_;
}

ProviderStats StorageProvider::stats() const
{
    std::lock_guard lock(mu_);
    return stats_;
}

void StorageProvider::reset_stats()
{
    std::lock_guard lock(mu_);
    stats_ = {};
}

TimestampMs StorageProvider::last_latency_ms() const
{
    std::lock_guard lock(mu_);
    return last_latency_;
}

void MemoryProvider::store(const std::string& file_id, std::uint16_t share_id, ByteView blob)
{
    std::lock_guard lock(mu_);
    blobs_[{file_id, share_id}] = Bytes(blob.begin(), blob.end());
}

Bytes MemoryProvider::load(const std::string& file_id, std::uint16_t share_id)
{
    std::lock_guard lock(mu_);
    auto it = blobs_.find({file_id, share_id});
    if (it == blobs_.end()) throw StorageFailure("no share " + file_id + "." + std::to_string(share_id));
    return it->second;
}

std::vector<std::pair<std::string, std::uint16_t>> MemoryProvider::keys()
{
    std::lock_guard lock(mu_);
    std::vector<std::pair<std::string, std::uint16_t>> out;
    for (const auto& [k, v] : blobs_) out.push_back(k);
    return out;
}

namespace {

bool safe_char(char c)
{
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' || c == '-';
}

std::string encode_name(const std::string& id)
{
    static const char* hex = "0123456789ABCDEF";
    std::string out;
    for (char c : id) {
        if (safe_char(c)) {
            out += c;
        } else {
            auto u = static_cast<unsigned char>(c);
            out += '%';
            out += hex[u >> 4];
            out += hex[u & 15];
        }
    }
    return out;
}

std::string decode_name(const std::string& name)
{
    std::string out;
    for (std::size_t i = 0; i < name.size(); ++i) {
        if (name[i] == '%' && i + 2 < name.size()) {
            out += static_cast<char>(std::stoi(name.substr(i + 1, 2), nullptr, 16));
            i += 2;
        } else {
            out += name[i];
        }
    }
    return out;
}

} // namespace

DirectoryProvider::DirectoryProvider(std::filesystem::path root, std::string location_id)
    : StorageProvider(location_id), dir_(std::move(root) / encode_name(location_id))
{
    std::filesystem::create_directories(dir_);
}

std::filesystem::path DirectoryProvider::path_for(const std::string& file_id, std::uint16_t share_id) const
{
    return dir_ / (encode_name(file_id) + "." + std::to_string(share_id) + ".share");
}

void DirectoryProvider::store(const std::string& file_id, std::uint16_t share_id, ByteView blob)
{
    auto path = path_for(file_id, share_id);
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out.write(reinterpret_cast<const char*>(blob.data()), static_cast<std::streamsize>(blob.size()));
        if (!out) throw StorageFailure("write failed: " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

Bytes DirectoryProvider::load(const std::string& file_id, std::uint16_t share_id)
{
    std::ifstream in(path_for(file_id, share_id), std::ios::binary);
    if (!in) throw StorageFailure("no share " + file_id + "." + std::to_string(share_id) + " at " + location_id());
    return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

std::vector<std::pair<std::string, std::uint16_t>> DirectoryProvider::keys()
{
    std::vector<std::pair<std::string, std::uint16_t>> out;
    for (const auto& entry : std::filesystem::directory_iterator(dir_)) {
        auto name = entry.path().filename().string();
        const std::string suffix = ".share";
        if (name.size() <= suffix.size() || name.compare(name.size() - suffix.size(), suffix.size(), suffix) != 0) {
            continue;
        }
        name.resize(name.size() - suffix.size());
        auto dot = name.rfind('.');
        if (dot == std::string::npos) continue;
        out.emplace_back(decode_name(name.substr(0, dot)),
                         static_cast<std::uint16_t>(std::stoul(name.substr(dot + 1))));
    }
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace dw::broker
