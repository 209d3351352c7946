#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "affscope/disclose.hpp"

namespace affscope::testing {

struct LabelledStatement {
    std::string_view text;
    Platform platform;
    std::optional<disclose::DisclosureType> expected;
};

// The sixteen published example disclosures with their published types,
// followed by five description sentences that disclose nothing.
inline const std::vector<LabelledStatement>& canonical_statements() {
    using T = disclose::DisclosureType;
    static const std::vector<LabelledStatement> all{
        {"Affiliate links may be present above", Platform::youtube, T::AffiliateLink},
        {"Some of the links may be affiliate links", Platform::youtube, T::AffiliateLink},
        {"(Disclosure: These are affiliate links)", Platform::youtube, T::AffiliateLink},
        {"*Amazon link(s) are affiliate links", Platform::youtube, T::AffiliateLink},
        {"(aff link)", Platform::pinterest, T::AffiliateLink},
        {"(affiliate)", Platform::pinterest, T::AffiliateLink},
        {"#affiliatelink", Platform::pinterest, T::AffiliateLink},
        {"This is an Amazon Affiliate link", Platform::pinterest, T::AffiliateLink},
        {"This video contains affiliate links, which means that if you click on one of the links, I'll receive a "
         "small commission",
         Platform::youtube, T::Explanation},
        {"I am an affiliate with eBay, Amazon, B&H and Adorama, which means I get a small commission when you buy "
         "through my links",
         Platform::youtube, T::Explanation},
        {"**Links that start with http://rstyle, Beautylish & MUG links are affiliate links, I do earn a small "
         "commission when you purchase through them, which helps me purchase products for review & improve my "
         "channel",
         Platform::youtube, T::Explanation},
        {"(This is an affiliate link and I receive a commission for the sales)", Platform::pinterest, T::Explanation},
        {"AMAZON LINK: (Bookmark this link to support the show for free!!!)", Platform::youtube, T::ChannelSupport},
        {"Support HWC while shopping at NCIX and Amazon", Platform::youtube, T::ChannelSupport},
        {"Purchase RP here and help support this channel via the amazon affiliate program", Platform::youtube,
         T::ChannelSupport},
        {"Shop using these links to support the channel", Platform::youtube, T::ChannelSupport},
        {"Thanks for watching", Platform::youtube, std::nullopt},
        {"Don't forget to subscribe for more videos", Platform::youtube, std::nullopt},
        {"Follow me on Instagram and Twitter", Platform::youtube, std::nullopt},
        {"Music by Kevin MacLeod", Platform::youtube, std::nullopt},
        {"Click the bell to get notified when I upload", Platform::youtube, std::nullopt},
    };
    return all;
}

}  // namespace affscope::testing
