#ifndef QDB_DESCRIPTOR_HPP
#define QDB_DESCRIPTOR_HPP

#include <optional>
#include <string>

#include "qdb/channels.hpp"

// Channel descriptor JSON, the wire format consumed by the CLI:
//   {"kind":"kraus","dim_in":2,"dim_out":2,"kraus":[[[re,im],...],...]}
//   {"kind":"gadc","param":"loss","gamma":0.5,"N":0.2}          (phi optional)
//   {"kind":"choi","dims":[2,2],"matrix":[...]}
// Complex numbers are [re, im] pairs. Unknown fields are rejected.

namespace qdb {

struct DescriptorError : std::runtime_error {
    explicit DescriptorError(const std::string& what) : std::runtime_error(what) {}
};

struct ChannelDescriptor {
    Choi choi;                          // channel at the descriptor's values
    std::optional<ChannelFamily> family;  // set for gadc descriptors
    double theta = 0.0;                 // family parameter value
    std::string kind;
};

ChannelDescriptor parse_channel_descriptor(const std::string& json_text);

}  // namespace qdb

#endif
