#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tiam {

enum class Errc {
  BadMagic,
  UnsupportedEncoding,
  ChannelsUnsupported,
  WrongSampleRate,
  EmptyAudio,
  SignalTooShort,
  BadFrameLength,
  EmptyFrame,
  FrameTooShortForPitch,
  IoError,
  NonFiniteValue,
  UnsupportedVersion,
  UnsupportedDtype,
  TruncatedPayload,
  MissingEmbedding,
  ShapeError,
  DimMismatch,
  LabelOutOfRange,
  NoForwardRecorded,
  VariantInputMissing,
  NonFiniteGradient,
  NonFiniteLoss,
  EmptyDataset,
  DuplicateId,
  UnknownDiscipline,
  MalformedRecord,
  BadRatios,
  InsufficientRecords,
  MissingFeature,
  BadConfig,
};

constexpr std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::BadMagic: return "BadMagic";
    case Errc::UnsupportedEncoding: return "UnsupportedEncoding";
    case Errc::ChannelsUnsupported: return "ChannelsUnsupported";
    case Errc::WrongSampleRate: return "WrongSampleRate";
    case Errc::EmptyAudio: return "EmptyAudio";
    case Errc::SignalTooShort: return "SignalTooShort";
    case Errc::BadFrameLength: return "BadFrameLength";
    case Errc::EmptyFrame: return "EmptyFrame";
    case Errc::FrameTooShortForPitch: return "FrameTooShortForPitch";
    case Errc::IoError: return "IoError";
    case Errc::NonFiniteValue: return "NonFiniteValue";
    case Errc::UnsupportedVersion: return "UnsupportedVersion";
    case Errc::UnsupportedDtype: return "UnsupportedDtype";
    case Errc::TruncatedPayload: return "TruncatedPayload";
    case Errc::MissingEmbedding: return "MissingEmbedding";
    case Errc::ShapeError: return "ShapeError";
    case Errc::DimMismatch: return "DimMismatch";
    case Errc::LabelOutOfRange: return "LabelOutOfRange";
    case Errc::NoForwardRecorded: return "NoForwardRecorded";
    case Errc::VariantInputMissing: return "VariantInputMissing";
    case Errc::NonFiniteGradient: return "NonFiniteGradient";
    case Errc::NonFiniteLoss: return "NonFiniteLoss";
    case Errc::EmptyDataset: return "EmptyDataset";
    case Errc::DuplicateId: return "DuplicateId";
    case Errc::UnknownDiscipline: return "UnknownDiscipline";
    case Errc::MalformedRecord: return "MalformedRecord";
    case Errc::BadRatios: return "BadRatios";
    case Errc::InsufficientRecords: return "InsufficientRecords";
    case Errc::MissingFeature: return "MissingFeature";
    case Errc::BadConfig: return "BadConfig";
  }
  return "Unknown";
}

/// Every failure in the library surfaces as this exception. `where` names the
/// file or record that failed (may be empty for pure computations).
class Error : public std::runtime_error {
 public:
  Error(Errc code, std::string message, std::string where = {})
      : std::runtime_error(format(code, message, where)),
        code_(code),
        where_(std::move(where)) {}

  Errc code() const noexcept { return code_; }
  const std::string& where() const noexcept { return where_; }

 private:
  static std::string format(Errc code, const std::string& message,
                            const std::string& where) {
    std::string s(to_string(code));
    if (!where.empty()) s += " [" + where + "]";
    s += ": " + message;
    return s;
  }

  Errc code_;
  std::string where_;
};

}  // namespace tiam
