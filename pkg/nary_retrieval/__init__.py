"""Binary and n-ary vector coding with exhaustive and multi-index-hash retrieval."""
