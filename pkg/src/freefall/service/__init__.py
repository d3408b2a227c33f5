from .protocol import PROTOCOL_VERSION, ProtocolError, WireMessage, decode, encode

__all__ = ["PROTOCOL_VERSION", "ProtocolError", "WireMessage", "decode", "encode"]
