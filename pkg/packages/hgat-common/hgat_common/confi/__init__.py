from hgat_common.confi.confi import *
