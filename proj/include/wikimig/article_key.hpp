#pragma once

#include <compare>
#include <string>

namespace wikimig {

/// Identifies one article in one language edition, e.g. {"uk.wikipedia.org", "Катовіце"}.
struct ArticleKey {
    std::string project;
    std::string title;

    /// Language code taken from the project host ("uk" for "uk.wikipedia.org").
    std::string language() const;
    /// Throws Error(Validation) unless the project is "<lang>.wikipedia.org" with a
    /// lowercase ASCII language token and the title is non-empty.
    void validate() const;
    std::string label() const { return project + "/" + title; }

    auto operator<=>(const ArticleKey&) const = default;
};

/// Language part of "<lang>.wikipedia[.org]"; empty when the host has no such prefix.
std::string language_of_project(const std::string& project);

}  // namespace wikimig
