# Value types and file schemas
